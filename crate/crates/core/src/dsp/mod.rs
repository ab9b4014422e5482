//! Image kernels built on the MAC: a 6-tap Gaussian FIR blur (unipolar)
//! and an 8-point DCT/iDCT round trip (bipolar), plus PGM I/O.

mod dct;
mod fir;
mod image;
mod pgm;
pub mod synthetic;

pub use dct::{
    dct8_exact, dct8_matrix, dct_pipeline, dct_pipeline_exact, DctMatrix, DctMode, DCT_STAGE_SCALE,
};
pub use fir::{fir_filter, fir_filter_exact, gaussian_taps, FirKernel, DEFAULT_SIGMA, FIR_TAPS};
pub use image::ImageBuffer;
pub use pgm::{decode_pgm, encode_pgm, pgm_read, pgm_write};
