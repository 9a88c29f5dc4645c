//! Stochastic block model graphs and the hitting times of their random walks.
//!
//! Sample a graph from a [`BlockModelConfig`], look at the spectrum of its
//! normalised adjacency matrix, and compute averaged hitting times exactly,
//! from the spectrum, or by simulating walks. The [`experiments`] module runs
//! replicate sweeps that compare these quantities with their large-N limits.
//!
//! ```
//! use sbm_hitting::{derive, exact_averages, sample, BlockModelConfig};
//!
//! let config = BlockModelConfig::new(60, 2, vec![0.5, 0.4], 0.2)?.with_seed(1);
//! let graph = sample(&config)?;
//! let h = exact_averages(&graph)?;
//! let prediction = derive(&config)?.gamma_bar / derive(&config)?.gamma[1] * 60.0;
//! assert!((h.h_target[59] / prediction - 1.0).abs() < 0.5);
//! # Ok::<(), sbm_hitting::Error>(())
//! ```

pub mod cli;
pub mod error;
pub mod experiments;
pub mod graph;
pub mod hitting;
pub mod model;
pub mod rng;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use graph::{sample, Graph};
pub use hitting::{exact_averages, exact_hitting, mc_hitting, HittingResult, WalkEstimate};
pub use model::{derive, BlockModelConfig, DerivedParams};
pub use spectral::SpectralDecomposition;
