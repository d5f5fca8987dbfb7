//! Martin kernels and the behavior of ray weights along rays.

mod boundary;
mod kernel;
mod summability;
mod weight;

pub use boundary::{boundary_limit_test, BoundaryReport, BoundaryStep, KernelSample};
pub use kernel::{martin_column, martin_kernel, KernelColumn, KernelValue};
pub use summability::{extremal_measure_along_ray, summability, Summability, SummabilityOptions, SummabilityReport};
pub use weight::{ray_weight, RayWeight};
