//! Exploratory statistics: Scott bandwidths, kernel intensities, the
//! space-time network K-function with Poisson envelopes, the multitype
//! pair correlation function, and amenity mixes around cluster centers.

mod amenity;
mod bandwidth;
mod intensity;
mod kfunction;
mod pcf;

pub use amenity::{amenity_mix, read_amenities_csv, Amenity, AmenityMix, Category};
pub use bandwidth::scott_bandwidth;
pub use intensity::{homogeneous_intensity, spacetime_intensity, spatial_intensity};
pub use kfunction::{
    envelope_pvalue, kfunction, EnvelopeConfig, EnvelopeResult, IntensityMode, KSurface,
};
pub use pcf::{multitype_pcf, PcfOptions};

/// `n` equally spaced values from `lo` to `hi` inclusive.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => (0..n)
            .map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}
