//! Named exchange-correlation functionals available to the builder.

use crate::entity::{ComponentType, Extras, Functional, FunctionalComponent, RangeKind};

/// HSE06 range-separation parameter, bohr^-1.
pub const HSE06_SCREENING: f64 = 0.11;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FunctionalLibraryEntry {
    pub slug: &'static str,
    pub name: &'static str,
    pub description: &'static str,
}

const LIBRARY: &[FunctionalLibraryEntry] = &[
    FunctionalLibraryEntry {
        slug: "pbe",
        name: "PBE",
        description: "GGA exchange plus GGA correlation",
    },
    FunctionalLibraryEntry {
        slug: "hse06",
        name: "HSE06",
        description: "screened hybrid, 25% short-range exact exchange",
    },
    FunctionalLibraryEntry {
        slug: "gam",
        name: "GAM",
        description: "non-separable exchange-correlation",
    },
    FunctionalLibraryEntry {
        slug: "thomas-fermi",
        name: "Thomas-Fermi",
        description: "orbital-free kinetic energy",
    },
    FunctionalLibraryEntry {
        slug: "vv10",
        name: "VV10",
        description: "non-local van der Waals correlation",
    },
];

pub fn functional_library() -> &'static [FunctionalLibraryEntry] {
    LIBRARY
}

pub fn library_functional(slug: &str) -> Option<Functional> {
    use ComponentType::*;
    let entry = LIBRARY.iter().find(|e| e.slug == slug)?;
    let components = match slug {
        "pbe" => vec![
            FunctionalComponent::new("PBE exchange", "pbe-exchange", Exchange, 1.0),
            FunctionalComponent::new("PBE correlation", "pbe-correlation", Correlation, 1.0),
        ],
        "hse06" => vec![
            FunctionalComponent::new("short-range exact exchange", "hf-sr-exchange", Exchange, 0.25)
                .range_separated(RangeKind::ShortRange, HSE06_SCREENING),
            FunctionalComponent::new("short-range PBE exchange", "pbe-sr-exchange", Exchange, 0.75)
                .range_separated(RangeKind::ShortRange, HSE06_SCREENING),
            FunctionalComponent::new("long-range PBE exchange", "pbe-lr-exchange", Exchange, 1.0)
                .range_separated(RangeKind::LongRange, HSE06_SCREENING),
            FunctionalComponent::new("PBE correlation", "pbe-correlation", Correlation, 1.0),
        ],
        "gam" => vec![FunctionalComponent::new("GAM exchange-correlation", "gam-xc", ExchangeCorrelation, 1.0)],
        "thomas-fermi" => vec![FunctionalComponent::new("Thomas-Fermi kinetic", "tf-kinetic", Kinetic, 1.0)],
        "vv10" => vec![FunctionalComponent::new("VV10 non-local correlation", "vv10-nl", NonLocalCorrelation, 1.0)],
        _ => return None,
    };
    Some(Functional {
        name: entry.name.to_string(),
        slug: entry.slug.to_string(),
        components,
        extras: Extras::new(),
    })
}
