//! Helpers shared by the integration test targets.

use finmask_core::lexicon::{Alias, UnitLexicon};
use finmask_core::Decimal;

/// The operative lexicon used across integration tests. It mirrors the
/// default lexicon the companion tooling ships: the built-in detection
/// vocabulary plus the "dollars" currency alias.
pub fn default_lexicon() -> UnitLexicon {
    UnitLexicon::builder()
        .unit(
            "currency_usd",
            "USD",
            vec![
                Alias::sensitive("$"),
                Alias::sensitive("US$"),
                Alias::sensitive("USD"),
                Alias::insensitive("dollars"),
            ],
        )
        .unit("percent", "%", vec![Alias::sensitive("%"), Alias::insensitive("percent")])
        .unit("per_share", "per share", vec![Alias::insensitive("per share")])
        .unit("shares", "shares", vec![Alias::insensitive("shares")])
        .unit(
            "basis_points",
            "basis points",
            vec![Alias::insensitive("basis points"), Alias::insensitive("bps")],
        )
        .unit(
            "percentage_points",
            "percentage points",
            vec![Alias::insensitive("percentage points")],
        )
        .scale(
            "scale_thousand",
            "thousand",
            vec![Alias::insensitive("thousand"), Alias::sensitive("K")],
            Decimal::pow10(3),
        )
        .scale(
            "scale_million",
            "million",
            vec![Alias::insensitive("million"), Alias::insensitive("mil"), Alias::sensitive("M")],
            Decimal::pow10(6),
        )
        .scale(
            "scale_billion",
            "billion",
            vec![Alias::insensitive("billion"), Alias::insensitive("bn"), Alias::sensitive("B")],
            Decimal::pow10(9),
        )
        .scale(
            "scale_trillion",
            "trillion",
            vec![Alias::insensitive("trillion")],
            Decimal::pow10(12),
        )
        .build()
        .expect("default lexicon is valid")
}
