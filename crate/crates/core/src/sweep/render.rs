use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::ScreenSpot;

pub const DISC_RADIUS: i64 = 2;
/// Height of the color legend strip appended below the plot area.
pub const LEGEND_HEIGHT: usize = 14;

const BACKGROUND: [u8; 3] = [0, 0, 0];
const LEGEND_BACKGROUND: [u8; 3] = [32, 32, 32];
const INVISIBLE: [u8; 3] = [128, 128, 128];
const TEXT: [u8; 3] = [220, 220, 220];
const VISIBLE_NM: (f64, f64) = (380.0, 780.0);

/// Wavelength (nm) → linear RGB anchors; interpolated piecewise-linearly.
const SPECTRUM: [(f64, [f64; 3]); 9] = [
    (380.0, [0.30, 0.00, 0.30]),
    (420.0, [0.33, 0.00, 1.00]),
    (440.0, [0.00, 0.00, 1.00]),
    (490.0, [0.00, 1.00, 1.00]),
    (510.0, [0.00, 1.00, 0.00]),
    (580.0, [1.00, 1.00, 0.00]),
    (645.0, [1.00, 0.00, 0.00]),
    (700.0, [1.00, 0.00, 0.00]),
    (780.0, [0.30, 0.00, 0.00]),
];

/// Display color of a wavelength; mid gray outside the visible band.
pub fn wavelength_to_rgb(lambda_nm: f64) -> [u8; 3] {
    if !(VISIBLE_NM.0..=VISIBLE_NM.1).contains(&lambda_nm) {
        return INVISIBLE;
    }
    let i = SPECTRUM.windows(2).position(|w| lambda_nm <= w[1].0).unwrap_or(SPECTRUM.len() - 2);
    let ((l0, c0), (l1, c1)) = (SPECTRUM[i], SPECTRUM[i + 1]);
    let t = (lambda_nm - l0) / (l1 - l0);
    std::array::from_fn(|k| ((c0[k] + t * (c1[k] - c0[k])) * 255.0).round() as u8)
}

/// Plot area in pixels and its scale; the screen origin is at the center.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Canvas {
    pub width: usize,
    pub height: usize,
    pub mm_per_px: f64,
}

impl Canvas {
    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.height == 0 || !(self.mm_per_px > 0.0) {
            return Err(Error::InvalidSpec(format!(
                "canvas {}x{} at {} mm/px is empty",
                self.width, self.height, self.mm_per_px
            )));
        }
        Ok(())
    }

    /// Pixel containing screen point `(x, y)` mm, `+y` upward.
    fn pixel(&self, x: f64, y: f64) -> (i64, i64) {
        let px = (self.width as f64 / 2.0 + x / self.mm_per_px).floor();
        let py = (self.height as f64 / 2.0 - y / self.mm_per_px).floor();
        (px as i64, py as i64)
    }

    fn contains(&self, (px, py): (i64, i64)) -> bool {
        px >= 0 && py >= 0 && (px as usize) < self.width && (py as usize) < self.height
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RenderedImage {
    pub width: usize,
    /// Plot height plus [`LEGEND_HEIGHT`].
    pub height: usize,
    pub rgb: Vec<u8>,
    pub drawn: usize,
    /// Spots whose center falls outside the plot area.
    pub clipped: usize,
}

impl RenderedImage {
    fn new(width: usize, height: usize) -> Self {
        let mut rgb = Vec::with_capacity(width * height * 3);
        for _ in 0..width * height {
            rgb.extend_from_slice(&BACKGROUND);
        }
        RenderedImage { width, height, rgb, drawn: 0, clipped: 0 }
    }

    pub fn get(&self, x: usize, y: usize) -> [u8; 3] {
        let i = 3 * (y * self.width + x);
        [self.rgb[i], self.rgb[i + 1], self.rgb[i + 2]]
    }

    fn put(&mut self, x: i64, y: i64, c: [u8; 3]) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            let i = 3 * (y as usize * self.width + x as usize);
            self.rgb[i..i + 3].copy_from_slice(&c);
        }
    }

    /// Binary PPM (P6).
    pub fn to_ppm(&self) -> Vec<u8> {
        let mut out = format!("P6\n{} {}\n255\n", self.width, self.height).into_bytes();
        out.extend_from_slice(&self.rgb);
        out
    }
}

/// Draws each spot as a disc colored by wavelength, later spots on top, and
/// appends the legend strip.
pub fn render_map(spots: &[ScreenSpot], canvas: &Canvas) -> Result<RenderedImage> {
    canvas.validate()?;
    let mut img = RenderedImage::new(canvas.width, canvas.height + LEGEND_HEIGHT);
    let r2 = DISC_RADIUS * DISC_RADIUS;
    for s in spots {
        let (cx, cy) = canvas.pixel(s.x, s.y);
        if !canvas.contains((cx, cy)) {
            img.clipped += 1;
            continue;
        }
        img.drawn += 1;
        let color = wavelength_to_rgb(s.lambda);
        for dy in -DISC_RADIUS..=DISC_RADIUS {
            for dx in -DISC_RADIUS..=DISC_RADIUS {
                if dx * dx + dy * dy <= r2 && canvas.contains((cx + dx, cy + dy)) {
                    img.put(cx + dx, cy + dy, color);
                }
            }
        }
    }
    draw_legend(&mut img, canvas.height);
    Ok(img)
}

/// 3×5 glyphs, rows top to bottom, bit 2 = leftmost column.
fn glyph(c: char) -> Option<[u8; 5]> {
    Some(match c {
        '0' => [7, 5, 5, 5, 7],
        '1' => [2, 6, 2, 2, 7],
        '2' => [7, 1, 7, 4, 7],
        '3' => [7, 1, 3, 1, 7],
        '4' => [5, 5, 7, 1, 1],
        '5' => [7, 4, 7, 1, 7],
        '6' => [7, 4, 7, 5, 7],
        '7' => [7, 1, 1, 2, 2],
        '8' => [7, 5, 7, 5, 7],
        '9' => [7, 5, 7, 1, 7],
        'I' => [7, 2, 2, 2, 7],
        'R' => [6, 5, 6, 5, 5],
        'U' => [5, 5, 5, 5, 7],
        'V' => [5, 5, 5, 5, 2],
        '/' => [1, 1, 2, 4, 4],
        _ => return None,
    })
}

fn draw_text(img: &mut RenderedImage, x0: i64, y0: i64, text: &str) {
    for (i, c) in text.chars().enumerate() {
        let Some(rows) = glyph(c) else { continue };
        let gx = x0 + 4 * i as i64;
        for (dy, bits) in rows.iter().enumerate() {
            for dx in 0..3 {
                if bits & (4 >> dx) != 0 {
                    img.put(gx + dx, y0 + dy as i64, TEXT);
                }
            }
        }
    }
}

/// Spectrum ramp over the left three quarters, a gray swatch for
/// wavelengths outside the visible band, and labels.
fn draw_legend(img: &mut RenderedImage, top: usize) {
    let w = img.width as i64;
    let top = top as i64;
    for y in top..top + LEGEND_HEIGHT as i64 {
        for x in 0..w {
            img.put(x, y, LEGEND_BACKGROUND);
        }
    }
    let ramp = (w * 3 / 4).max(1);
    for x in 0..ramp {
        let l = VISIBLE_NM.0 + (VISIBLE_NM.1 - VISIBLE_NM.0) * x as f64 / (ramp - 1).max(1) as f64;
        let c = wavelength_to_rgb(l);
        for y in top + 1..top + 6 {
            img.put(x, y, c);
        }
    }
    for x in ramp + 2..w {
        for y in top + 1..top + 6 {
            img.put(x, y, INVISIBLE);
        }
    }
    draw_text(img, 1, top + 8, "380");
    draw_text(img, ramp - 12, top + 8, "780");
    draw_text(img, ramp + 2, top + 8, "UV/IR");
}

/// The same map as SVG circles (no legend), for vector output.
pub fn render_svg(spots: &[ScreenSpot], canvas: &Canvas) -> Result<String> {
    canvas.validate()?;
    let mut out = String::new();
    let (w, h) = (canvas.width, canvas.height);
    writeln!(out, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#)
        .unwrap();
    writeln!(out, r#"<rect width="{w}" height="{h}" fill="black"/>"#).unwrap();
    for s in spots {
        let cx = w as f64 / 2.0 + s.x / canvas.mm_per_px;
        let cy = h as f64 / 2.0 - s.y / canvas.mm_per_px;
        let [r, g, b] = wavelength_to_rgb(s.lambda);
        writeln!(out, r##"<circle cx="{cx:.3}" cy="{cy:.3}" r="{DISC_RADIUS}" fill="#{r:02x}{g:02x}{b:02x}"/>"##)
            .unwrap();
    }
    out.push_str("</svg>\n");
    Ok(out)
}
