//! Size guards for the exhaustive routines.
//!
//! Defaults can be raised through environment variables; nothing reads the
//! environment unless [`Limits::from_env`] is called.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Limits {
    /// Points in a geometry's point table.
    pub max_points: u128,
    /// Flats visited by all-ranks scans (Edmonds brute force, small-flat check).
    pub max_all_flats: u128,
    /// Flats of a single rank visited by the dense-flat census.
    pub max_census_flats: u128,
    /// Ground-set size for the all-subsets Edmonds oracle.
    pub max_subset_ground: u128,
    /// Product of class sizes for the naive transversal oracle.
    pub max_transversals: u128,
    /// Ground-set size for the decomposition searcher.
    pub max_search_ground: u128,
    /// Points for exact colouring inside experiments.
    pub max_colouring_points: u128,
}

impl Default for Limits {
    fn default() -> Self {
        Limits {
            max_points: 1 << 24,
            max_all_flats: 1 << 22,
            max_census_flats: 1 << 24,
            max_subset_ground: 18,
            max_transversals: 1_000_000,
            max_search_ground: 24,
            max_colouring_points: 5000,
        }
    }
}

impl Limits {
    pub const ENV_VARS: [&'static str; 7] = [
        "PGM_MAX_POINTS",
        "PGM_MAX_ALL_FLATS",
        "PGM_MAX_CENSUS_FLATS",
        "PGM_MAX_SUBSET_GROUND",
        "PGM_MAX_TRANSVERSALS",
        "PGM_MAX_SEARCH_GROUND",
        "PGM_MAX_COLOURING_POINTS",
    ];

    pub fn from_env() -> Result<Self> {
        let mut limits = Limits::default();
        let slots: [&mut u128; 7] = [
            &mut limits.max_points,
            &mut limits.max_all_flats,
            &mut limits.max_census_flats,
            &mut limits.max_subset_ground,
            &mut limits.max_transversals,
            &mut limits.max_search_ground,
            &mut limits.max_colouring_points,
        ];
        for (var, slot) in Self::ENV_VARS.iter().zip(slots) {
            if let Ok(raw) = std::env::var(var) {
                *slot = raw
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidParameter(format!("{var}={raw}")))?;
            }
        }
        Ok(limits)
    }
}

pub(crate) fn guard(what: &'static str, actual: u128, limit: u128) -> Result<()> {
    if actual > limit {
        Err(Error::GuardExceeded {
            what,
            actual,
            limit,
        })
    } else {
        Ok(())
    }
}
