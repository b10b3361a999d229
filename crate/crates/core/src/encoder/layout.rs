use serde::{Deserialize, Serialize};

use super::font::{GLYPH_HEIGHT, GLYPH_WIDTH};
use crate::error::{Error, Result};

/// Preferred number of characters per feature value.
pub const DEFAULT_CHARS_PER_CELL: usize = 5;
/// Fewest characters a cell may hold.
pub const MIN_CHARS_PER_CELL: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellRect {
    pub x: usize,
    pub y: usize,
    pub w: usize,
    pub h: usize,
}

/// Where each feature's text goes in the image. Depends only on the feature
/// count and image side.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayoutPlan {
    pub image_side: usize,
    pub grid_rows: usize,
    pub grid_cols: usize,
    /// One rectangle per feature, row-major.
    pub cell_rects: Vec<CellRect>,
    pub chars_per_cell: usize,
    pub glyph_scale: usize,
    /// Characters per text line inside a cell; longer strings wrap.
    pub chars_per_line: usize,
}

impl LayoutPlan {
    pub fn n_features(&self) -> usize {
        self.cell_rects.len()
    }
}

// Glyphs advance by width + 1 horizontally and height + 1 vertically.
fn chars_per_line(cell_w: usize, scale: usize) -> usize {
    (cell_w + scale) / ((GLYPH_WIDTH + 1) * scale)
}

fn lines(cell_h: usize, scale: usize) -> usize {
    (cell_h + scale) / ((GLYPH_HEIGHT + 1) * scale)
}

fn capacity(cell_w: usize, cell_h: usize, scale: usize) -> usize {
    chars_per_line(cell_w, scale) * lines(cell_h, scale)
}

pub fn plan_layout(n_features: usize, image_side: usize) -> Result<LayoutPlan> {
    plan_layout_with(n_features, image_side, DEFAULT_CHARS_PER_CELL)
}

/// Square-ish grid, one cell per feature. Up to `max_chars` characters are
/// kept per value (never fewer than [`MIN_CHARS_PER_CELL`]); the glyph scale
/// is the largest that still fits them.
pub fn plan_layout_with(n_features: usize, image_side: usize, max_chars: usize) -> Result<LayoutPlan> {
    if n_features == 0 {
        return Err(Error::InvalidInput("layout needs at least one feature".into()));
    }
    if max_chars < MIN_CHARS_PER_CELL {
        return Err(Error::InvalidInput(format!(
            "chars per cell must be at least {MIN_CHARS_PER_CELL}"
        )));
    }
    let grid_cols = (n_features as f64).sqrt().ceil() as usize;
    let grid_rows = n_features.div_ceil(grid_cols);
    let cell_w = image_side / grid_cols;
    let cell_h = image_side / grid_rows;

    let fit = capacity(cell_w, cell_h, 1);
    if fit < MIN_CHARS_PER_CELL {
        return Err(Error::Layout(format!(
            "{image_side} px image gives {cell_w}x{cell_h} px cells for {n_features} features, \
             which hold {fit} characters; need {MIN_CHARS_PER_CELL}. Use a larger image side"
        )));
    }
    let chars_per_cell = fit.min(max_chars);
    let mut glyph_scale = 1;
    while capacity(cell_w, cell_h, glyph_scale + 1) >= chars_per_cell {
        glyph_scale += 1;
    }

    let cell_rects = (0..n_features)
        .map(|f| CellRect {
            x: (f % grid_cols) * cell_w,
            y: (f / grid_cols) * cell_h,
            w: cell_w,
            h: cell_h,
        })
        .collect();

    Ok(LayoutPlan {
        image_side,
        grid_rows,
        grid_cols,
        cell_rects,
        chars_per_cell,
        glyph_scale,
        chars_per_line: chars_per_line(cell_w, glyph_scale),
    })
}
