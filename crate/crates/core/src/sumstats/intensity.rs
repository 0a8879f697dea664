use statrs::function::erf::erfc;

use crate::error::Result;
use crate::events::Event;
use crate::kernels::{planar_gaussian, temporal_kernel, KernelConfig};
use crate::network::LinearNetwork;
use crate::scalar::Scalar;

/// Events per meter per unit time of a homogeneous pattern on the network
/// × `[0, 1]`.
pub fn homogeneous_intensity<T: Scalar>(net: &LinearNetwork<T>, n: usize) -> T {
    T::of_usize(n) / net.total_length()
}

/// Convolution estimate of the spatial intensity of `data` at `at`.
pub fn spatial_intensity<T: Scalar>(
    kernels: &KernelConfig<T>,
    data: &[Event<T>],
    h_s: T,
    at: &[Event<T>],
) -> Result<Vec<T>> {
    let corr: Vec<T> = data
        .iter()
        .map(|e| kernels.correction_term(e.location.xy, h_s))
        .collect::<Result<_>>()?;
    Ok(at
        .iter()
        .map(|x| {
            data.iter()
                .zip(&corr)
                .map(|(c, &k)| planar_gaussian(x.location.xy, c.location.xy, h_s) / k)
                .fold(T::zero(), |a, b| a + b)
        })
        .collect())
}

/// Mass of `N(c, h²)` inside `[0, 1]`.
fn window_mass(c: f64, h: f64) -> f64 {
    let s = std::f64::consts::SQRT_2 * h;
    1.0 - 0.5 * erfc(c / s) - 0.5 * erfc((1.0 - c) / s)
}

/// Space-time convolution estimate of the intensity of `data` at `at`:
/// the network-corrected spatial kernel times a temporal Gaussian
/// renormalized to `[0, 1]`, summed over the data.
pub fn spacetime_intensity<T: Scalar>(
    kernels: &KernelConfig<T>,
    data: &[Event<T>],
    h_s: T,
    h_t: T,
    at: &[Event<T>],
) -> Result<Vec<T>> {
    let scale: Vec<T> = data
        .iter()
        .map(|e| {
            let c = kernels.correction_term(e.location.xy, h_s)?;
            Ok(c * T::of(window_mass(e.time.f64(), h_t.f64())))
        })
        .collect::<Result<_>>()?;
    Ok(at
        .iter()
        .map(|x| {
            data.iter()
                .zip(&scale)
                .map(|(c, &s)| {
                    planar_gaussian(x.location.xy, c.location.xy, h_s)
                        * temporal_kernel(x.time, c.time, h_t)
                        / s
                })
                .fold(T::zero(), |a, b| a + b)
        })
        .collect())
}
