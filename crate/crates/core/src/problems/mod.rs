//! Problem instances: the DRSLR min-max game and synthetic games with known
//! solutions.

mod bilinear;
mod drslr;
mod synthetic;

pub use bilinear::{make_bilinear_game, make_noisy_bilinear_game, BilinearGame};
pub use drslr::{psi, synthetic_dataset, DrslrField, DrslrParams, DrslrProblem, DEFAULT_BATCH};
pub use synthetic::{AffineField, KnownSolution};
