//! Filtered chain complexes over prime fields.
//!
//! Spectral-sequence pages are computed by cancelling generator pairs, with
//! explicit homotopy-equivalence witnesses; an independent oracle computes
//! the same pages from the definition. Also included: mapping cones and the
//! triangle lemma checker, hypercube assembly, a GF(2) Khovanov cube builder
//! and continued-fraction framing triads.

pub mod complex;
pub mod cube;
pub mod format;
pub mod keylemma;
pub mod khovanov;
pub mod linalg;
pub mod random;
pub mod reduce;
pub mod triads;

pub use complex::{ChainMap, FilteredComplex, Generator, Homotopy, MapConvention};
pub use linalg::{Field, SparseMatrix};
