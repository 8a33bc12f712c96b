use serde::{Deserialize, Serialize};

use crate::C64;

use super::{PointCloud, Polyline};

/// Axis-aligned rectangle of the complex plane.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl Window {
    pub fn new(re_min: f64, re_max: f64, im_min: f64, im_max: f64) -> Self {
        assert!(re_max > re_min && im_max > im_min, "window must be nonempty");
        Self { re_min, re_max, im_min, im_max }
    }

    /// Square window of half-width `r` around `center`.
    pub fn centered(center: C64, r: f64) -> Self {
        Self::new(center.re - r, center.re + r, center.im - r, center.im + r)
    }

    /// Pixel coordinates (column, row from the top), continuous.
    fn to_pixel(self, z: C64, width: usize, height: usize) -> (f64, f64) {
        let x = (z.re - self.re_min) / (self.re_max - self.re_min) * width as f64;
        let y = (self.im_max - z.im) / (self.im_max - self.im_min) * height as f64;
        (x, y)
    }

    /// Centre of pixel `(col, row)`.
    pub fn pixel_center(&self, col: usize, row: usize, width: usize, height: usize) -> C64 {
        C64::new(
            self.re_min + (col as f64 + 0.5) / width as f64 * (self.re_max - self.re_min),
            self.im_max - (row as f64 + 0.5) / height as f64 * (self.im_max - self.im_min),
        )
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pixels {
    Gray(Vec<u8>),
    Rgb(Vec<u8>),
}

/// An 8-bit image with the window it depicts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RasterImage {
    pub width: usize,
    pub height: usize,
    pub window: Window,
    pub pixels: Pixels,
}

impl RasterImage {
    /// Binary PGM (`P5`) or PPM (`P6`), maxval 255.
    pub fn to_pnm(&self) -> Vec<u8> {
        let (magic, data) = match &self.pixels {
            Pixels::Gray(d) => ("P5", d),
            Pixels::Rgb(d) => ("P6", d),
        };
        let mut out = format!("{magic}\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(data);
        out
    }

    /// Gray value at `(col, row)`; RGB images report the red channel.
    pub fn value(&self, col: usize, row: usize) -> u8 {
        match &self.pixels {
            Pixels::Gray(d) => d[row * self.width + col],
            Pixels::Rgb(d) => d[3 * (row * self.width + col)],
        }
    }
}

/// Adds `weight` to the four pixels around a continuous position.
fn splat(acc: &mut [f32], width: usize, height: usize, x: f64, y: f64, weight: f32) {
    let (fx, fy) = (x - 0.5, y - 0.5);
    let (x0, y0) = (fx.floor(), fy.floor());
    let (tx, ty) = ((fx - x0) as f32, (fy - y0) as f32);
    for (dx, wx) in [(0, 1.0 - tx), (1, tx)] {
        for (dy, wy) in [(0, 1.0 - ty), (1, ty)] {
            let (cx, cy) = (x0 as i64 + dx, y0 as i64 + dy);
            if cx >= 0 && cy >= 0 && (cx as usize) < width && (cy as usize) < height {
                acc[cy as usize * width + cx as usize] += weight * wx * wy;
            }
        }
    }
}

/// Dark anti-aliased strokes and dots on a white background.
///
/// Segments are sampled every half pixel and splatted bilinearly; input is
/// processed in order, so the output does not depend on threading.
pub fn raster(lines: &[Polyline], clouds: &[PointCloud], width: usize, height: usize, window: Window) -> RasterImage {
    let mut acc = vec![0f32; width * height];
    for line in lines {
        let n = line.points.len();
        let segs = if line.closed && n > 1 { n } else { n.saturating_sub(1) };
        if n == 1 {
            let (x, y) = window.to_pixel(line.points[0], width, height);
            splat(&mut acc, width, height, x, y, 1.0);
        }
        for i in 0..segs {
            let (a, b) = (line.points[i], line.points[(i + 1) % n]);
            let (ax, ay) = window.to_pixel(a, width, height);
            let (bx, by) = window.to_pixel(b, width, height);
            let len = (bx - ax).hypot(by - ay);
            if !len.is_finite() || len > 4.0 * (width + height) as f64 {
                continue;
            }
            let steps = (2.0 * len).ceil().max(1.0) as usize;
            for k in 0..steps {
                let t = (k as f64 + 0.5) / steps as f64;
                splat(&mut acc, width, height, ax + t * (bx - ax), ay + t * (by - ay), (len / steps as f64).min(1.0) as f32);
            }
        }
    }
    for cloud in clouds {
        for &p in &cloud.points {
            let (x, y) = window.to_pixel(p, width, height);
            splat(&mut acc, width, height, x, y, 1.0);
        }
    }
    let pixels = acc.iter().map(|&c| 255 - (c.min(1.0) * 255.0).round() as u8).collect();
    RasterImage { width, height, window, pixels: Pixels::Gray(pixels) }
}

/// First `n` with `|t_n| > 2` for `t_0 = 0`, `t_{n+1} = t_n^2 + c`, or `None` if bounded up to `max_iter`.
pub fn mandelbrot_escape_time(c: C64, max_iter: usize) -> Option<usize> {
    let mut t = C64::new(0.0, 0.0);
    for n in 1..=max_iter {
        t = t * t + c;
        if t.norm_sqr() > 4.0 {
            return Some(n);
        }
    }
    None
}

/// Escape-time image of the Mandelbrot set: black inside, gray bands outside.
pub fn render_mandelbrot(window: Window, width: usize, height: usize, max_iter: usize) -> RasterImage {
    use rayon::prelude::*;
    let pixels: Vec<u8> = (0..width * height)
        .into_par_iter()
        .map(|i| {
            let c = window.pixel_center(i % width, i / width, width, height);
            match mandelbrot_escape_time(c, max_iter) {
                None => 0,
                Some(n) => 255 - ((n * 255) / max_iter.max(1)).min(200) as u8,
            }
        })
        .collect();
    RasterImage { width, height, window, pixels: Pixels::Gray(pixels) }
}
