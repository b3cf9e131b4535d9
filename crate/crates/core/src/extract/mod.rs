//! Level-2 extractors: descriptive summaries of processes, images and text.

mod image;
pub(crate) mod moments;
mod smoothing;
mod text;

pub use image::{color_histogram, histogram_moments, Channel, ColorHistogram};
pub use moments::{moments, quantiles, MomentSummary};
pub use smoothing::{ewma, window_to_alpha};
pub use text::{tfidf, tokenize, TfidfMatrix};
