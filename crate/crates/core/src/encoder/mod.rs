//! Two-dimensional word embedding: each instance's feature values are typeset
//! as fixed-font text into a square black-and-white image.

pub mod font;
pub mod format;
pub mod layout;

use std::io::Write;
use std::path::Path;

pub use self::font::{GlyphFont, GLYPH_HEIGHT, GLYPH_WIDTH};
pub use self::format::format_value;
pub use self::layout::{plan_layout, plan_layout_with, CellRect, LayoutPlan};
use crate::error::{Error, Result};
use crate::streams::TabularChunk;

pub const BLACK: u8 = 0;
pub const WHITE: u8 = 255;

/// Square single-channel image with pixels in {0, 255}, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct BinaryImage {
    pub side: usize,
    pub pixels: Vec<u8>,
}

impl BinaryImage {
    pub fn black(side: usize) -> Self {
        Self {
            side,
            pixels: vec![BLACK; side * side],
        }
    }

    pub fn get(&self, x: usize, y: usize) -> u8 {
        self.pixels[y * self.side + x]
    }

    pub fn white_fraction(&self) -> f64 {
        let white = self.pixels.iter().filter(|p| **p == WHITE).count();
        white as f64 / self.pixels.len() as f64
    }

    /// Binary PGM (P5) encoding.
    pub fn to_pgm(&self) -> Vec<u8> {
        let mut out = format!("P5\n{} {}\n255\n", self.side, self.side).into_bytes();
        out.extend_from_slice(&self.pixels);
        out
    }

    pub fn write_pgm(&self, path: &Path) -> Result<()> {
        let mut f = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        f.write_all(&self.to_pgm()).map_err(|e| Error::io(path, e))
    }
}

/// A chunk after encoding: one image per instance, labels carried over.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageChunk {
    pub chunk_index: usize,
    pub side: usize,
    pub images: Vec<BinaryImage>,
    pub labels: Vec<u8>,
}

impl ImageChunk {
    pub fn len(&self) -> usize {
        self.images.len()
    }

    pub fn is_empty(&self) -> bool {
        self.images.is_empty()
    }
}

/// Layout and font bundled for repeated encoding.
#[derive(Debug, Clone)]
pub struct StmlEncoder {
    pub plan: LayoutPlan,
    pub font: GlyphFont,
}

impl StmlEncoder {
    pub fn new(n_features: usize, image_side: usize) -> Result<Self> {
        Ok(Self {
            plan: plan_layout(n_features, image_side)?,
            font: GlyphFont::standard(),
        })
    }

    pub fn encode_instance(&self, x: &[f64]) -> Result<BinaryImage> {
        encode_instance(x, &self.plan, &self.font)
    }

    pub fn encode_chunk(&self, chunk: &TabularChunk) -> Result<ImageChunk> {
        encode_chunk(chunk, &self.plan, &self.font)
    }
}

fn draw_text(img: &mut BinaryImage, text: &str, cell: &CellRect, plan: &LayoutPlan, font: &GlyphFont) -> Result<()> {
    let s = plan.glyph_scale;
    for (i, ch) in text.chars().enumerate() {
        let glyph = font
            .glyph(ch)
            .ok_or_else(|| Error::InvalidInput(format!("font has no glyph for {ch:?}")))?;
        let x0 = cell.x + (i % plan.chars_per_line) * (GLYPH_WIDTH + 1) * s;
        let y0 = cell.y + (i / plan.chars_per_line) * (GLYPH_HEIGHT + 1) * s;
        for row in 0..GLYPH_HEIGHT {
            for col in 0..GLYPH_WIDTH {
                if !GlyphFont::lit(glyph, col, row) {
                    continue;
                }
                for dy in 0..s {
                    let y = y0 + row * s + dy;
                    let start = y * img.side + x0 + col * s;
                    img.pixels[start..start + s].fill(WHITE);
                }
            }
        }
    }
    Ok(())
}

pub fn encode_instance(x: &[f64], plan: &LayoutPlan, font: &GlyphFont) -> Result<BinaryImage> {
    if x.len() != plan.n_features() {
        return Err(Error::InvalidInput(format!(
            "instance has {} features, layout expects {}",
            x.len(),
            plan.n_features()
        )));
    }
    let mut img = BinaryImage::black(plan.image_side);
    for (v, cell) in x.iter().zip(&plan.cell_rects) {
        let text = format_value(*v, plan.chars_per_cell)?;
        draw_text(&mut img, &text, cell, plan, font)?;
    }
    Ok(img)
}

pub fn encode_chunk(chunk: &TabularChunk, plan: &LayoutPlan, font: &GlyphFont) -> Result<ImageChunk> {
    if chunk.is_empty() {
        return Err(Error::InvalidInput("cannot encode an empty chunk".into()));
    }
    let images = chunk
        .features
        .rows()
        .into_iter()
        .map(|row| match row.as_slice() {
            Some(s) => encode_instance(s, plan, font),
            None => encode_instance(&row.to_vec(), plan, font),
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ImageChunk {
        chunk_index: chunk.chunk_index,
        side: plan.image_side,
        images,
        labels: chunk.labels.clone(),
    })
}

#[cfg(test)]
mod tests {
    use ndarray::Array2;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    use super::*;

    fn cell_pixels(img: &BinaryImage, c: &CellRect) -> Vec<u8> {
        (c.y..c.y + c.h)
            .flat_map(|y| (c.x..c.x + c.w).map(move |x| (x, y)))
            .map(|(x, y)| img.get(x, y))
            .collect()
    }

    #[test]
    fn every_cell_gets_ink() {
        let enc = StmlEncoder::new(8, 50).unwrap();
        let img = enc
            .encode_instance(&[0.1, -2.0, 3.3, 0.0, 1e6, -1e-7, 42.0, 0.5])
            .unwrap();
        for c in &enc.plan.cell_rects {
            assert!(cell_pixels(&img, c).contains(&WHITE));
        }
        assert!(img.pixels.iter().all(|p| *p == BLACK || *p == WHITE));
        assert!(img.white_fraction() < 0.5);
    }

    #[test]
    fn deterministic() {
        let enc = StmlEncoder::new(3, 40).unwrap();
        let x = [0.25, 7.5, -1.0];
        assert_eq!(enc.encode_instance(&x).unwrap(), enc.encode_instance(&x).unwrap());
    }

    #[test]
    fn dimension_mismatch() {
        let enc = StmlEncoder::new(3, 40).unwrap();
        assert!(matches!(enc.encode_instance(&[1.0]), Err(Error::InvalidInput(_))));
    }

    // Changing one feature only touches that feature's cell, and touches it
    // whenever the printed value changes.
    #[test]
    fn single_feature_change_is_local() {
        let enc = StmlEncoder::new(8, 50).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..100 {
            let x: Vec<f64> = (0..8).map(|_| rng.random_range(-5.0..5.0)).collect();
            let j = rng.random_range(0..8);
            let mut x2 = x.clone();
            x2[j] = rng.random_range(-5.0..5.0);
            let (a, b) = (enc.encode_instance(&x).unwrap(), enc.encode_instance(&x2).unwrap());
            for (f, c) in enc.plan.cell_rects.iter().enumerate() {
                let same = cell_pixels(&a, c) == cell_pixels(&b, c);
                if f != j {
                    assert!(same);
                } else {
                    let texts_differ = format_value(x[j], enc.plan.chars_per_cell).unwrap()
                        != format_value(x2[j], enc.plan.chars_per_cell).unwrap();
                    assert_eq!(!same, texts_differ);
                }
            }
            // Nothing is drawn outside the cells.
            let outside = |img: &BinaryImage| {
                (0..50 * 50)
                    .filter(|i| {
                        let (x, y) = (i % 50, i / 50);
                        !enc.plan
                            .cell_rects
                            .iter()
                            .any(|c| x >= c.x && x < c.x + c.w && y >= c.y && y < c.y + c.h)
                    })
                    .map(|i| img.pixels[i])
                    .collect::<Vec<_>>()
            };
            assert!(outside(&a).iter().all(|p| *p == BLACK));
        }
    }

    #[test]
    fn chunk_encoding_preserves_labels_and_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let features = Array2::from_shape_fn((250, 8), |_| rng.random_range(0.0..1.0));
        let labels: Vec<u8> = (0..250).map(|i| u8::from(i % 9 == 0)).collect();
        let chunk = TabularChunk::new(4, features, labels.clone()).unwrap();
        let enc = StmlEncoder::new(8, 50).unwrap();
        let out = enc.encode_chunk(&chunk).unwrap();
        assert_eq!(out.len(), 250);
        assert_eq!(out.labels, labels);
        assert_eq!(out.chunk_index, 4);
        let row7: Vec<f64> = chunk.features.row(7).to_vec();
        assert_eq!(out.images[7], enc.encode_instance(&row7).unwrap());
    }

    #[test]
    fn pgm_header() {
        let img = BinaryImage::black(3);
        let pgm = img.to_pgm();
        assert!(pgm.starts_with(b"P5\n3 3\n255\n"));
        assert_eq!(pgm.len(), 11 + 9);
    }
}
