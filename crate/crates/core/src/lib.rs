//! Greedy 3-term-AP-free (Stanley) sequences and their growth-rate analysis.
//!
//! The pipeline runs in five stages, each in its own module:
//!
//! - [`sequence`] generates a sequence greedily from a seed set, with
//!   [`oracle`] providing independent brute-force checks of the result;
//! - [`series`] derives the exponent ratio `ln a_k / ln k`, the windowed
//!   local exponent, the deviation `ln a_k - 2 ln k + ln ln k`, and a
//!   moving-average smoother;
//! - [`extrema`] locates prominent peaks and troughs of the smoothed ratio;
//! - [`regression`] fits `A + B·(ln ln k / ln k) + C·(1 / ln k)` to the
//!   ratio at selected indices;
//! - [`store`] and [`figure`] read and write the CSV/JSON artifacts.
//!
//! Work that fans out over independent items goes through [`exec`], which
//! uses rayon when the `parallel` feature is enabled.
//!
//! ```
//! use stanley_core::sequence::{generate, GenerateOptions, SeedSet};
//!
//! let seed = SeedSet::pair(4).unwrap();
//! let seq = generate(&seed, 7, GenerateOptions::default()).unwrap();
//! assert_eq!(seq.terms(), &[0, 4, 5, 7, 11, 12, 16]);
//! ```

pub mod bitset;
pub mod error;
pub mod exec;
pub mod extrema;
pub mod figure;
pub mod lstsq;
pub mod oracle;
pub mod regression;
pub mod sequence;
pub mod series;
pub mod store;

pub use error::{Error, Result};
pub use exec::ExecMode;
pub use extrema::{ExtremaKind, ExtremaSet, PeakConfig};
pub use regression::{FitInput, GrowthFit, Subset};
pub use sequence::{generate, SeedSet, StanleySequence, Strategy};
pub use series::{IndexedSeries, SmoothingConfig};
