/// Glyph cell width in pixels at scale 1.
pub const GLYPH_WIDTH: usize = 5;
/// Glyph cell height in pixels at scale 1.
pub const GLYPH_HEIGHT: usize = 7;

/// Fixed 5x7 bitmap font covering the characters numeric formatting can emit.
/// Each row is stored in the low five bits, most significant bit leftmost.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GlyphFont {
    glyphs: Vec<(char, [u8; GLYPH_HEIGHT])>,
}

impl Default for GlyphFont {
    fn default() -> Self {
        Self::standard()
    }
}

impl GlyphFont {
    pub fn standard() -> Self {
        let glyphs = vec![
            ('0', [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E]),
            ('1', [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E]),
            ('2', [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F]),
            ('3', [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E]),
            ('4', [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02]),
            ('5', [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E]),
            ('6', [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E]),
            ('7', [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08]),
            ('8', [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E]),
            ('9', [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C]),
            ('.', [0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C]),
            ('-', [0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00]),
            ('e', [0x00, 0x00, 0x0E, 0x11, 0x1F, 0x10, 0x0E]),
        ];
        Self { glyphs }
    }

    pub fn glyph(&self, ch: char) -> Option<&[u8; GLYPH_HEIGHT]> {
        self.glyphs.iter().find(|(c, _)| *c == ch).map(|(_, g)| g)
    }

    pub fn chars(&self) -> impl Iterator<Item = char> + '_ {
        self.glyphs.iter().map(|(c, _)| *c)
    }

    /// Whether pixel `(col, row)` of the glyph is lit.
    pub fn lit(glyph: &[u8; GLYPH_HEIGHT], col: usize, row: usize) -> bool {
        glyph[row] & (1 << (GLYPH_WIDTH - 1 - col)) != 0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn every_glyph_is_nonempty_and_distinct() {
        let font = GlyphFont::standard();
        let all: Vec<_> = font.chars().map(|c| *font.glyph(c).unwrap()).collect();
        assert_eq!(all.len(), 13);
        for (i, g) in all.iter().enumerate() {
            assert!(g.iter().any(|r| *r != 0));
            assert!(g.iter().all(|r| *r < 32));
            for h in &all[i + 1..] {
                assert_ne!(g, h);
            }
        }
        for c in "0123456789.-e".chars() {
            assert!(font.glyph(c).is_some(), "missing {c}");
        }
        assert!(font.glyph('x').is_none());
    }
}
