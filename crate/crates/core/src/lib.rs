//! Data channel extension for tiny AI accelerators.
//!
//! Accelerators such as the MAX78000 give every convolution processor its own
//! small data-memory instance, so a first layer fed a 3-channel image leaves
//! most processors idle. `dexkit` fills those idle channels with additional
//! evenly spaced pixels from the original image ([`transform::dex_extend`]),
//! provides the baseline strategies it is compared against ([`baselines`]),
//! and reports how a tensor fits the device ([`accel`]).
//!
//! ```
//! use dexkit::{dex_extend, ImageTensor, Shape};
//!
//! let pixels = (0..3 * 64 * 64).map(|v| (v % 256) as u8).collect();
//! let image = ImageTensor::from_u8(Shape::new(3, 64, 64), pixels).unwrap();
//! let extended = dex_extend(&image, Shape::new(64, 32, 32)).unwrap();
//! assert_eq!(extended.shape(), Shape::new(64, 32, 32));
//! ```

pub mod accel;
pub mod baselines;
pub mod error;
pub mod pipeline;
pub mod profile;
pub mod strategy;
pub mod tensor;
pub mod transform;

pub use accel::{PlanRequest, UtilizationReport};
pub use error::{DexError, Result};
pub use profile::DeviceProfile;
pub use strategy::extend;
pub use tensor::{make_tensor, DType, ExtensionConfig, ImageTensor, LayerSpec, Shape, Strategy, TensorData};
pub use transform::{dex_extend, downsample, patch_bounds, PatchBounds};
