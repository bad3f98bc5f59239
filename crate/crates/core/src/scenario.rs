//! Named Owner/Public scenarios.
//!
//! The `-2d` family uses disk rewards of radius 1 on `[-5, 5]^2`, with the
//! Public's center at distance 0, 1.5 and 3 from the Owner's. The `-words`
//! family uses word-count ranges on the alphabet `{1, ..., 8}`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::exact::ExactRunConfig;
use crate::reward::RewardField;
use crate::space::StateSpace;
use crate::Result;

pub const BOX_LO: f64 = -5.0;
pub const BOX_HI: f64 = 5.0;
pub const GRID_RESOLUTION_2D: usize = 61;
pub const DISK_RADIUS: f64 = 1.0;
pub const WORD_MIN: i64 = 1;
pub const WORD_MAX: i64 = 8;
pub const EXACT_ITERATIONS_WORDS: usize = 500;
pub const EXACT_ITERATIONS_GRID: usize = 200;

pub const PRESET_NAMES: [&str; 8] = [
    "perfect-2d",
    "partial-2d",
    "disjoint-2d",
    "perfect-words",
    "partial-words",
    "disjoint-words",
    "partial-words-caption",
    "disjoint-words-caption",
];

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub space: StateSpace,
    pub owner: RewardField,
    pub public: RewardField,
    pub exact_iterations: usize,
}

impl Scenario {
    /// Two disks of radius 1 on the analysis grid.
    pub fn disks(name: &str, owner_center: [f64; 2], public_center: [f64; 2]) -> Result<Self> {
        Ok(Scenario {
            name: name.into(),
            space: analysis_grid(),
            owner: RewardField::circular(owner_center, DISK_RADIUS)?,
            public: RewardField::circular(public_center, DISK_RADIUS)?,
            exact_iterations: EXACT_ITERATIONS_GRID,
        })
    }

    /// Two word-count ranges on `{1..8}`.
    pub fn words(name: &str, owner: (i64, i64), public: (i64, i64)) -> Result<Self> {
        Ok(Scenario {
            name: name.into(),
            space: words_space(),
            owner: RewardField::range(owner.0, owner.1)?,
            public: RewardField::range(public.0, public.1)?,
            exact_iterations: EXACT_ITERATIONS_WORDS,
        })
    }

    pub fn is_2d(&self) -> bool {
        self.space.is_grid() && self.space.dim() == 2
    }

    /// Exact-dynamics configuration with K = M = 2, tau = 1, uniform start.
    pub fn exact_config(&self) -> ExactRunConfig {
        ExactRunConfig::new(self.space.clone(), self.owner.clone(), self.public.clone(), self.exact_iterations)
    }
}

/// `[-5, 5]^2` at 61 points per side.
pub fn analysis_grid() -> StateSpace {
    StateSpace::square(BOX_LO, BOX_HI, GRID_RESOLUTION_2D).expect("static grid")
}

pub fn words_space() -> StateSpace {
    StateSpace::alphabet_range(WORD_MIN, WORD_MAX).expect("static alphabet")
}

pub fn perfect_2d() -> Scenario {
    Scenario::disks("perfect-2d", [0.0, 0.0], [0.0, 0.0]).expect("static scenario")
}

pub fn partial_2d() -> Scenario {
    Scenario::disks("partial-2d", [0.0, 0.0], [1.5, 0.0]).expect("static scenario")
}

pub fn disjoint_2d() -> Scenario {
    Scenario::disks("disjoint-2d", [0.0, 0.0], [3.0, 0.0]).expect("static scenario")
}

pub fn perfect_words() -> Scenario {
    Scenario::words("perfect-words", (4, 4), (4, 4)).expect("static scenario")
}

pub fn partial_words() -> Scenario {
    Scenario::words("partial-words", (2, 4), (4, 6)).expect("static scenario")
}

pub fn disjoint_words() -> Scenario {
    Scenario::words("disjoint-words", (1, 3), (5, 6)).expect("static scenario")
}

/// Word ranges as given in the word-count figure legend, which differ from
/// the ones described with the experiment.
pub fn partial_words_caption() -> Scenario {
    Scenario::words("partial-words-caption", (1, 3), (3, 5)).expect("static scenario")
}

pub fn disjoint_words_caption() -> Scenario {
    Scenario::words("disjoint-words-caption", (3, 4), (5, 6)).expect("static scenario")
}

pub fn preset(name: &str) -> Option<Scenario> {
    Some(match name {
        "perfect-2d" => perfect_2d(),
        "partial-2d" => partial_2d(),
        "disjoint-2d" => disjoint_2d(),
        "perfect-words" => perfect_words(),
        "partial-words" => partial_words(),
        "disjoint-words" => disjoint_words(),
        "partial-words-caption" => partial_words_caption(),
        "disjoint-words-caption" => disjoint_words_caption(),
        _ => return None,
    })
}

pub fn all_presets() -> Vec<Scenario> {
    PRESET_NAMES.iter().filter_map(|n| preset(n)).collect()
}
