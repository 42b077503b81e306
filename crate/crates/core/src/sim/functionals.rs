use serde::Serialize;

use crate::path::CadlagPath;

/// The statistics compared across constructions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ContourFunctionals {
    pub lifetime: f64,
    /// Excursions above `r - delta` that reach `r`.
    pub crossings: usize,
    /// Time spent in `[0, r / 2]`.
    pub low_occupation: f64,
}

pub fn contour_functionals(contour: &CadlagPath, r: f64, delta: f64) -> ContourFunctionals {
    ContourFunctionals {
        lifetime: contour.lifetime(),
        crossings: contour.upcrossings(r - delta, r - 1e-9),
        low_occupation: contour.time_at_or_below(0.5 * r),
    }
}
