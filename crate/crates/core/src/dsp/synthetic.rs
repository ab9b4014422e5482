//! Deterministic stand-ins for natural photographs: smooth shading, hard
//! edges and band-limited texture, built from seeded value noise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ImageBuffer;

/// Lattice noise with smoothstep interpolation, values in `[0, 1]`.
struct ValueNoise {
    cell: f64,
    cols: usize,
    lattice: Vec<f64>,
}

impl ValueNoise {
    fn new(width: usize, height: usize, cell: f64, rng: &mut ChaCha8Rng) -> Self {
        let cols = (width as f64 / cell) as usize + 2;
        let rows = (height as f64 / cell) as usize + 2;
        let lattice = (0..cols * rows).map(|_| rng.gen::<f64>()).collect();
        Self {
            cell,
            cols,
            lattice,
        }
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        let (y, x) = (r as f64 / self.cell, c as f64 / self.cell);
        let (i, j) = (y as usize, x as usize);
        let smooth = |t: f64| t * t * (3.0 - 2.0 * t);
        let (ty, tx) = (smooth(y - i as f64), smooth(x - j as f64));
        let v = |a: usize, b: usize| self.lattice[a * self.cols + b];
        let top = v(i, j) * (1.0 - tx) + v(i, j + 1) * tx;
        let bottom = v(i + 1, j) * (1.0 - tx) + v(i + 1, j + 1) * tx;
        top * (1.0 - ty) + bottom * ty
    }
}

/// Sum of octaves from `cell` pixels down to 2 pixels, amplitude halving
/// per octave, normalized to `[0, 1]`.
fn fractal(width: usize, height: usize, cell: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut layers = Vec::new();
    let mut size = cell;
    while size >= 2.0 {
        layers.push(ValueNoise::new(width, height, size, rng));
        size /= 2.0;
    }
    let norm: f64 = (0..layers.len()).map(|i| 0.5f64.powi(i as i32)).sum();
    let mut out = Vec::with_capacity(width * height);
    for r in 0..height {
        for c in 0..width {
            let s: f64 = layers
                .iter()
                .enumerate()
                .map(|(i, l)| 0.5f64.powi(i as i32) * l.at(r, c))
                .sum();
            out.push(s / norm);
        }
    }
    out
}

/// Diagonal shading ramp.
pub fn gradient(width: usize, height: usize) -> ImageBuffer {
    let span = (width + height).saturating_sub(2).max(1) as f64;
    ImageBuffer::from_fn(width, height, |r, c| 0.1 + 0.8 * (r + c) as f64 / span)
}

/// Discs and rectangles over a soft background; about half of them carry a
/// fine stripe pattern.
pub fn shapes(width: usize, height: usize, seed: u64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scale = width.min(height).max(1) as f64;
    let objects: Vec<(bool, bool, f64, f64, f64, f64, f64)> = (0..12)
        .map(|_| {
            (
                rng.gen::<bool>(),
                rng.gen::<bool>(),
                rng.gen::<f64>() * height as f64,
                rng.gen::<f64>() * width as f64,
                scale * rng.gen_range(0.04..0.2),
                scale * rng.gen_range(0.04..0.2),
                rng.gen_range(0.05..0.95),
            )
        })
        .collect();
    let base = gradient(width, height);
    let grain: Vec<f64> = (0..width * height)
        .map(|_| rng.gen::<f64>() - 0.5)
        .collect();
    ImageBuffer::from_fn(width, height, |r, c| {
        let (y, x) = (r as f64, c as f64);
        let mut v = 0.3 + 0.4 * base.get(r, c) + 0.3 * grain[r * width + c];
        for &(disc, striped, cy, cx, ry, rx, shade) in &objects {
            let inside = if disc {
                ((y - cy) / ry).powi(2) + ((x - cx) / ry).powi(2) <= 1.0
            } else {
                (y - cy).abs() <= ry && (x - cx).abs() <= rx
            };
            if inside {
                let stripe = if striped && (r + c) / 2 % 2 == 0 {
                    0.4
                } else {
                    0.0
                };
                v = (shade + stripe).min(1.0);
            }
        }
        v
    })
}

/// Fine-grained fractal texture, the hardest case for a low-pass filter.
pub fn texture(width: usize, height: usize, seed: u64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = fractal(width, height, 4.0, &mut rng);
    let grain: Vec<f64> = (0..width * height).map(|_| rng.gen::<f64>()).collect();
    ImageBuffer::from_fn(width, height, |r, c| {
        let i = r * width + c;
        0.7 * noise[i] + 0.3 * grain[i]
    })
}

/// Shapes and shading with texture and grain: the closest thing here to a
/// photograph.
pub fn scene(width: usize, height: usize, seed: u64) -> ImageBuffer {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5CE7E);
    let coarse = fractal(width, height, 64.0, &mut rng);
    let fine = fractal(width, height, 2.0, &mut rng);
    let grain: Vec<f64> = (0..width * height)
        .map(|_| rng.gen::<f64>() - 0.5)
        .collect();
    let objects = shapes(width, height, seed);
    ImageBuffer::from_fn(width, height, |r, c| {
        let i = r * width + c;
        0.55 * objects.get(r, c) + 0.35 * coarse[i] + 0.4 * (fine[i] - 0.5) + 0.3 * grain[i] + 0.05
    })
}

/// Named benchmark images, all `width × height`.
pub fn test_images(width: usize, height: usize) -> Vec<(&'static str, ImageBuffer)> {
    vec![
        ("scene-a", scene(width, height, 1)),
        ("scene-b", scene(width, height, 2)),
        ("shapes", shapes(width, height, 3)),
        ("texture", texture(width, height, 4)),
        ("scene-c", scene(width, height, 5)),
    ]
}
