//! Genealogical heights, generations and level profiles.

mod generations;
mod height;
mod poisson;
mod profile;

pub use generations::{discrete_generations, tree_generations, Generations};
pub use height::{height_estimate, height_process, HeightEstimate};
pub use poisson::{infinite_split_rates, sample_genealogy_poisson, BranchEvent, BranchKind, GenealogyTree};
pub use profile::{level_profile, LevelGrid, LevelProfile};
