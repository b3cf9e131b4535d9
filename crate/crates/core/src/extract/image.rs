use crate::error::{Error, Result};
use crate::extract::MomentSummary;
use crate::raster::RasterImage;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Channel {
    Gray,
    Red,
    Green,
    Blue,
}

impl Channel {
    pub fn name(self) -> &'static str {
        match self {
            Channel::Gray => "gray",
            Channel::Red => "red",
            Channel::Green => "green",
            Channel::Blue => "blue",
        }
    }
}

/// Intensity counts of one channel; bin `i` counts pixels of intensity `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColorHistogram {
    pub channel: Channel,
    pub bins: [u64; 256],
}

impl ColorHistogram {
    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }
}

/// One gray histogram, or red/green/blue histograms for an RGB image.
pub fn color_histogram(img: &RasterImage) -> Result<Vec<ColorHistogram>> {
    let channels: &[Channel] = match img.channels() {
        1 => &[Channel::Gray],
        3 => &[Channel::Red, Channel::Green, Channel::Blue],
        c => return Err(Error::UnsupportedDepth(format!("{c} channels"))),
    };
    let mut out: Vec<ColorHistogram> = channels
        .iter()
        .map(|&channel| ColorHistogram {
            channel,
            bins: [0; 256],
        })
        .collect();
    for pixel in img.pixels().chunks_exact(channels.len()) {
        for (hist, &v) in out.iter_mut().zip(pixel) {
            hist.bins[v as usize] += 1;
        }
    }
    Ok(out)
}

/// Moments of the intensity distribution described by the histogram, equal to
/// [`moments`](crate::extract::moments) of the expanded pixel values.
pub fn histogram_moments(h: &ColorHistogram) -> Result<MomentSummary> {
    MomentSummary::from_weighted(
        h.bins
            .iter()
            .enumerate()
            .map(|(intensity, &count)| (intensity as f64, count as f64)),
    )
}
