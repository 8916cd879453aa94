//! Shared inputs for the criterion benches.

use subbergman::{PowerSeriesSymbol, SymbolSpec, WeightParameter};

pub fn alpha(a: f64) -> WeightParameter {
    WeightParameter::new(a).expect("bench alpha in range")
}

/// Default-length series for a symbol in text form.
pub fn symbol(text: &str) -> PowerSeriesSymbol {
    text.parse::<SymbolSpec>()
        .and_then(|s| s.default_series())
        .expect("bench symbol parses")
}
