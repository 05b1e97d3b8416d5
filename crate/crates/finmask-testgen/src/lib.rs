//! Test-support crate: a generator of numeric span renderings plus a
//! brute-force semantic oracle.
//!
//! The oracle is intentionally written against the *documented semantics* —
//! plain integer arithmetic on digit strings — and must never import the
//! crates under test. Property and acceptance suites compare the production
//! matcher against this independent implementation.

use rand_core::RngCore;

/// The meaning of a rendered span, independent of surface form.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Semantic {
    /// Significand digits as an integer (may be zero). Kept below 10^13 so
    /// every derived quantity fits comfortably in `i128`.
    pub sig: u64,
    /// Number of digits after the decimal point (0..=4).
    pub frac: u32,
    pub neg: bool,
    /// Power-of-ten scale carried by a scale word: 0, 3, 6, 9 or 12.
    pub scale_exp: u32,
    pub units: UnitChoice,
}

/// Which non-scale unit groups the rendering carries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnitChoice {
    Bare,
    Currency,
    CurrencyPerShare,
    Percent,
    PerShare,
    Shares,
    BasisPoints,
    PercentagePoints,
}

impl UnitChoice {
    pub const ALL: [UnitChoice; 8] = [
        UnitChoice::Bare,
        UnitChoice::Currency,
        UnitChoice::CurrencyPerShare,
        UnitChoice::Percent,
        UnitChoice::PerShare,
        UnitChoice::Shares,
        UnitChoice::BasisPoints,
        UnitChoice::PercentagePoints,
    ];

    /// Group identifiers (as in the default lexicon) this choice renders.
    pub fn groups(self) -> &'static [&'static str] {
        match self {
            UnitChoice::Bare => &[],
            UnitChoice::Currency => &["currency_usd"],
            UnitChoice::CurrencyPerShare => &["currency_usd", "per_share"],
            UnitChoice::Percent => &["percent"],
            UnitChoice::PerShare => &["per_share"],
            UnitChoice::Shares => &["shares"],
            UnitChoice::BasisPoints => &["basis_points"],
            UnitChoice::PercentagePoints => &["percentage_points"],
        }
    }
}

/// Surface-form knobs. Indices are taken modulo the number of spellings
/// available for the semantic, so any byte is a valid choice.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Format {
    pub commas: bool,
    pub scale_style: u8,
    pub unit_style: u8,
    pub noise: u8,
    pub trailing_period: bool,
    pub neg_parens: bool,
}

const NOISE: [&str; 5] = ["", "about ", "approximately ", "roughly ", "nearly "];

fn digits_string(sig: u64, frac: u32, commas: bool) -> String {
    let raw = sig.to_string();
    let frac = frac as usize;
    let (int_part, frac_part) = if frac == 0 {
        (raw, String::new())
    } else {
        let padded = if raw.len() <= frac {
            format!("{}{}", "0".repeat(frac + 1 - raw.len()), raw)
        } else {
            raw
        };
        let cut = padded.len() - frac;
        (padded[..cut].to_string(), padded[cut..].to_string())
    };
    let int_fmt = if commas && int_part.len() > 3 {
        let bytes = int_part.as_bytes();
        let mut out = String::new();
        for (i, b) in bytes.iter().enumerate() {
            if i > 0 && (bytes.len() - i) % 3 == 0 {
                out.push(',');
            }
            out.push(*b as char);
        }
        out
    } else {
        int_part
    };
    if frac_part.is_empty() {
        int_fmt
    } else {
        format!("{int_fmt}.{frac_part}")
    }
}

/// Renders the semantic into one of its many legal surface forms.
pub fn render(sem: &Semantic, fmt: &Format) -> String {
    let digits = digits_string(sem.sig, sem.frac, fmt.commas);
    let body = if sem.neg {
        if fmt.neg_parens {
            format!("({digits})")
        } else {
            format!("-{digits}")
        }
    } else {
        digits
    };
    let scale_options: &[&str] = match sem.scale_exp {
        0 => &[],
        3 => &["thousand", "K", "Thousand"],
        6 => &["million", "M", "mil"],
        9 => &["billion", "B", "bn"],
        12 => &["trillion", "Trillion"],
        other => panic!("unsupported scale exponent {other}"),
    };
    let core = if scale_options.is_empty() {
        body
    } else {
        let word = scale_options[fmt.scale_style as usize % scale_options.len()];
        if word.len() == 1 {
            format!("{body}{word}")
        } else {
            format!("{body} {word}")
        }
    };
    let with_units = match sem.units {
        UnitChoice::Bare => core,
        UnitChoice::Currency => match fmt.unit_style % 4 {
            0 => format!("${core}"),
            1 => format!("US$ {core}"),
            2 => format!("USD {core}"),
            _ => format!("{core} dollars"),
        },
        UnitChoice::CurrencyPerShare => match fmt.unit_style % 3 {
            0 => format!("${core} per share"),
            1 => format!("US$ {core} per share"),
            _ => format!("USD {core} per share"),
        },
        UnitChoice::Percent => {
            if fmt.unit_style.is_multiple_of(2) {
                format!("{core}%")
            } else {
                format!("{core} percent")
            }
        }
        UnitChoice::PerShare => format!("{core} per share"),
        UnitChoice::Shares => format!("{core} shares"),
        UnitChoice::BasisPoints => {
            if fmt.unit_style.is_multiple_of(2) {
                format!("{core} bps")
            } else {
                format!("{core} basis points")
            }
        }
        UnitChoice::PercentagePoints => format!("{core} percentage points"),
    };
    let noise = NOISE[fmt.noise as usize % NOISE.len()];
    let period = if fmt.trailing_period { "." } else { "" };
    format!("{noise}{with_units}{period}")
}

/// Exact value and precision of a semantic, as plain integers:
/// value = num × 10^exp with num canonical (no trailing zeros unless zero),
/// precision = 10^precision_exp.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Canonical {
    pub num: i128,
    pub exp: i32,
    pub precision_exp: i32,
}

pub fn canonical(sem: &Semantic) -> Canonical {
    if sem.sig == 0 {
        // A zero literal contributes precision 10^0; the scale word still
        // multiplies it.
        return Canonical { num: 0, exp: 0, precision_exp: sem.scale_exp as i32 };
    }
    let mut num = sem.sig as i128;
    let mut exp = sem.scale_exp as i32 - sem.frac as i32;
    while num % 10 == 0 {
        num /= 10;
        exp += 1;
    }
    if sem.neg {
        num = -num;
    }
    Canonical { num, exp, precision_exp: exp }
}

pub fn pow10_i128(n: u32) -> i128 {
    assert!(n <= 38, "pow10_i128 out of range: {n}");
    (0..n).fold(1i128, |acc, _| acc * 10)
}

/// round(num × 10^exp / 10^p), half away from zero, in exact integer math.
pub fn round_at(num: i128, exp: i32, p: i32) -> i128 {
    if exp >= p {
        num * pow10_i128((exp - p) as u32)
    } else {
        let d = pow10_i128((p - exp) as u32);
        let q = num / d;
        let r = num % d;
        if 2 * r.abs() >= d {
            q + num.signum()
        } else {
            q
        }
    }
}

/// The documented numeric rule: compare both values rounded at the coarser
/// of the two precisions.
pub fn oracle_numeric_match(a: &Canonical, b: &Canonical) -> bool {
    let p = a.precision_exp.max(b.precision_exp);
    round_at(a.num, a.exp, p) == round_at(b.num, b.exp, p)
}

/// The documented unit rule: the ground truth's non-scale groups must be a
/// subset of the prediction's.
pub fn oracle_unit_match(truth: UnitChoice, prediction: UnitChoice) -> bool {
    truth.groups().iter().all(|g| prediction.groups().contains(g))
}

/// Draws a semantic from a seeded RNG. Modulo bias is irrelevant for test
/// generation.
pub fn draw_semantic(rng: &mut impl RngCore) -> Semantic {
    let sig = match rng.next_u64() % 4 {
        0 => rng.next_u64() % 1_000,
        1 => rng.next_u64() % 1_000_000,
        2 => rng.next_u64() % 10_000_000_000_000,
        _ => {
            // Bias toward interesting shapes: trailing zeros and near-ties.
            let base = rng.next_u64() % 100_000;
            base * pow10_u64(rng.next_u64() as u32 % 6)
        }
    };
    Semantic {
        sig,
        frac: (rng.next_u64() % 5) as u32,
        neg: rng.next_u64().is_multiple_of(8),
        scale_exp: [0, 0, 3, 6, 9, 12][(rng.next_u64() % 6) as usize],
        units: UnitChoice::ALL[(rng.next_u64() % UnitChoice::ALL.len() as u64) as usize],
    }
}

fn pow10_u64(n: u32) -> u64 {
    (0..n).fold(1u64, |acc, _| acc * 10)
}

pub fn draw_format(rng: &mut impl RngCore) -> Format {
    Format {
        commas: rng.next_u64().is_multiple_of(2),
        scale_style: (rng.next_u64() % 8) as u8,
        unit_style: (rng.next_u64() % 8) as u8,
        noise: (rng.next_u64() % 8) as u8,
        trailing_period: rng.next_u64().is_multiple_of(2),
        neg_parens: rng.next_u64().is_multiple_of(2),
    }
}

/// Draws a second semantic that is often "close" to the first so the oracle
/// suite exercises boundary roundings, not just far-apart values.
pub fn draw_related_semantic(rng: &mut impl RngCore, base: &Semantic) -> Semantic {
    match rng.next_u64() % 4 {
        // Same value, re-expressed with a shifted scale word.
        0 => {
            let mut other = *base;
            if other.scale_exp >= 3 && other.sig <= 9_999_999_999 {
                other.scale_exp -= 3;
                other.sig *= 1_000;
            }
            other.units = UnitChoice::ALL[(rng.next_u64() % UnitChoice::ALL.len() as u64) as usize];
            other
        }
        // Perturb the significand slightly (rounding boundaries).
        1 => {
            let mut other = *base;
            let delta = rng.next_u64() % 3;
            other.sig = other.sig.saturating_add(delta).min(9_999_999_999_999);
            other
        }
        // Coarsen: keep the leading digits only.
        2 => {
            let mut other = *base;
            let drop = rng.next_u64() as u32 % 4;
            let d = pow10_u64(drop);
            other.sig = round_half_away_u64(other.sig, d) * d;
            other
        }
        // Independent draw.
        _ => draw_semantic(rng),
    }
}

fn round_half_away_u64(v: u64, d: u64) -> u64 {
    let q = v / d;
    let r = v % d;
    if 2 * r >= d {
        q + 1
    } else {
        q
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sem(sig: u64, frac: u32, neg: bool, scale_exp: u32, units: UnitChoice) -> Semantic {
        Semantic { sig, frac, neg, scale_exp, units }
    }

    #[test]
    fn canonical_worked_examples() {
        // 1.23 billion = 123 × 10^7, precision 10^7.
        let c = canonical(&sem(123, 2, false, 9, UnitChoice::Bare));
        assert_eq!(c, Canonical { num: 123, exp: 7, precision_exp: 7 });

        // 1,230,000 = 123 × 10^4, precision 10^4.
        let c = canonical(&sem(1_230_000, 0, false, 0, UnitChoice::Bare));
        assert_eq!(c, Canonical { num: 123, exp: 4, precision_exp: 4 });

        // (7.2) million = −72 × 10^5, precision 10^5.
        let c = canonical(&sem(72, 1, true, 6, UnitChoice::Bare));
        assert_eq!(c, Canonical { num: -72, exp: 5, precision_exp: 5 });
    }

    #[test]
    fn rounding_is_half_away_from_zero() {
        assert_eq!(round_at(25, 0, 1), 3);
        assert_eq!(round_at(-25, 0, 1), -3);
        assert_eq!(round_at(24, 0, 1), 2);
        assert_eq!(round_at(123, 4, 5), 12);
        assert_eq!(round_at(5, 0, 3), 0);
    }

    #[test]
    fn oracle_matches_documented_example() {
        // "1,230,000" vs "1.2 million": coarser precision 10^5, both round
        // to 12, so the numbers agree.
        let truth = canonical(&sem(1_230_000, 0, false, 0, UnitChoice::Bare));
        let pred = canonical(&sem(12, 1, false, 6, UnitChoice::Bare));
        assert!(oracle_numeric_match(&truth, &pred));

        // "1.3 million" disagrees.
        let pred = canonical(&sem(13, 1, false, 6, UnitChoice::Bare));
        assert!(!oracle_numeric_match(&truth, &pred));
    }

    #[test]
    fn unit_rule_is_subset() {
        assert!(oracle_unit_match(UnitChoice::Bare, UnitChoice::Currency));
        assert!(!oracle_unit_match(UnitChoice::Currency, UnitChoice::Bare));
        assert!(oracle_unit_match(UnitChoice::Currency, UnitChoice::CurrencyPerShare));
        assert!(!oracle_unit_match(UnitChoice::CurrencyPerShare, UnitChoice::Currency));
        assert!(oracle_unit_match(UnitChoice::Percent, UnitChoice::Percent));
        assert!(!oracle_unit_match(UnitChoice::Percent, UnitChoice::BasisPoints));
    }

    #[test]
    fn renderings_are_well_formed() {
        let s = sem(1_230_000, 0, false, 0, UnitChoice::Currency);
        let f = Format {
            commas: true,
            scale_style: 0,
            unit_style: 0,
            noise: 0,
            trailing_period: false,
            neg_parens: false,
        };
        assert_eq!(render(&s, &f), "$1,230,000");

        let s = sem(72, 1, true, 6, UnitChoice::Bare);
        let f = Format {
            commas: false,
            scale_style: 0,
            unit_style: 0,
            noise: 0,
            trailing_period: false,
            neg_parens: true,
        };
        assert_eq!(render(&s, &f), "(7.2) million");

        let s = sem(5, 3, false, 0, UnitChoice::Percent);
        let f = Format {
            commas: false,
            scale_style: 0,
            unit_style: 0,
            noise: 1,
            trailing_period: true,
            neg_parens: false,
        };
        assert_eq!(render(&s, &f), "about 0.005%.");

        let s = sem(250, 0, false, 6, UnitChoice::Currency);
        let f = Format {
            commas: false,
            scale_style: 1,
            unit_style: 0,
            noise: 0,
            trailing_period: false,
            neg_parens: false,
        };
        assert_eq!(render(&s, &f), "$250M");
    }
}
