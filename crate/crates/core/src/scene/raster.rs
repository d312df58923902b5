//! Binary rasters and primitive rendering. Pixel `(px, py)` has its centre
//! at integer coordinates `(px, py)` and is white when that centre lies
//! inside the primitive.

use std::io::{self, BufRead, Write};

use crate::angle::wrap_positive;

use super::geometry::{CirclePose, LinkPose};

/// Slack on the inside test so that rotations by `pi` give identical
/// pixel sets despite rounding in `sin`/`cos`.
const EDGE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Part {
    Circle(CirclePose),
    Link(LinkPose),
}

/// Inclusive pixel bounds, possibly outside the image.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PixelBox {
    pub x0: i64,
    pub y0: i64,
    pub x1: i64,
    pub y1: i64,
}

impl Part {
    pub fn is_finite(&self) -> bool {
        match self {
            Part::Circle(c) => c.x.is_finite() && c.y.is_finite() && c.r.is_finite(),
            Part::Link(l) => [l.x, l.y, l.alpha, l.w, l.h].iter().all(|v| v.is_finite()),
        }
    }

    pub fn bounds(&self) -> PixelBox {
        let (x, y, ex, ey) = match *self {
            Part::Circle(c) => (c.x, c.y, c.r.abs(), c.r.abs()),
            Part::Link(l) => {
                let a = wrap_positive(l.alpha);
                let (s, c) = a.sin_cos();
                let (hw, hh) = (0.5 * l.w.abs(), 0.5 * l.h.abs());
                (l.x, l.y, c.abs() * hw + s.abs() * hh, s.abs() * hw + c.abs() * hh)
            }
        };
        PixelBox {
            x0: (x - ex - EDGE_EPS).ceil() as i64,
            y0: (y - ey - EDGE_EPS).ceil() as i64,
            x1: (x + ex + EDGE_EPS).floor() as i64,
            y1: (y + ey + EDGE_EPS).floor() as i64,
        }
    }

    /// Returns a closure testing pixel centres against the part.
    pub fn inside_test(&self) -> impl Fn(i64, i64) -> bool {
        let part = *self;
        let (s, c) = match part {
            Part::Link(l) => wrap_positive(l.alpha).sin_cos(),
            Part::Circle(_) => (0.0, 1.0),
        };
        move |px, py| match part {
            Part::Circle(k) => {
                let (dx, dy) = (px as f64 - k.x, py as f64 - k.y);
                dx * dx + dy * dy <= k.r * k.r + EDGE_EPS
            }
            Part::Link(l) => {
                let (dx, dy) = (px as f64 - l.x, py as f64 - l.y);
                let u = dx * c + dy * s;
                let v = -dx * s + dy * c;
                u.abs() <= 0.5 * l.w + EDGE_EPS && v.abs() <= 0.5 * l.h + EDGE_EPS
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryImage {
    width: usize,
    height: usize,
    pixels: Vec<bool>,
}

impl BinaryImage {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryImage {
            width,
            height,
            pixels: vec![false; width * height],
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn in_bounds(&self, px: i64, py: i64) -> bool {
        px >= 0 && py >= 0 && (px as usize) < self.width && (py as usize) < self.height
    }

    pub fn get(&self, px: i64, py: i64) -> bool {
        self.in_bounds(px, py) && self.pixels[py as usize * self.width + px as usize]
    }

    pub fn set(&mut self, px: i64, py: i64, value: bool) {
        if self.in_bounds(px, py) {
            self.pixels[py as usize * self.width + px as usize] = value;
        }
    }

    pub fn count_white(&self) -> usize {
        self.pixels.iter().filter(|&&p| p).count()
    }

    /// Draws `part` in white, clipped to the image.
    pub fn draw(&mut self, part: &Part) {
        if !part.is_finite() {
            return;
        }
        let b = part.bounds();
        let inside = part.inside_test();
        for py in b.y0.max(0)..=b.y1.min(self.height as i64 - 1) {
            for px in b.x0.max(0)..=b.x1.min(self.width as i64 - 1) {
                if inside(px, py) {
                    self.pixels[py as usize * self.width + px as usize] = true;
                }
            }
        }
    }

    pub fn rendered(mut self, part: &Part) -> Self {
        self.draw(part);
        self
    }

    /// Grey levels: `on` for white pixels, `off` otherwise.
    pub fn to_gray(&self, on: u8, off: u8) -> GrayImage {
        GrayImage {
            width: self.width,
            height: self.height,
            pixels: self.pixels.iter().map(|&p| if p { on } else { off }).collect(),
        }
    }

    /// Binary PGM (`P5`, maxval 255): white is 255, black is 0.
    pub fn write_pgm<W: Write>(&self, out: W) -> io::Result<()> {
        self.to_gray(255, 0).write_pgm(out)
    }

    /// Reads a `P5` PGM; any nonzero byte is white.
    pub fn read_pgm<R: BufRead>(input: R) -> io::Result<Self> {
        let gray = GrayImage::read_pgm(input)?;
        Ok(BinaryImage {
            width: gray.width,
            height: gray.height,
            pixels: gray.pixels.iter().map(|&p| p != 0).collect(),
        })
    }
}

/// 8-bit raster used for output frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrayImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

impl GrayImage {
    pub fn set(&mut self, px: i64, py: i64, value: u8) {
        if px >= 0 && py >= 0 && (px as usize) < self.width && (py as usize) < self.height {
            self.pixels[py as usize * self.width + px as usize] = value;
        }
    }

    pub fn draw(&mut self, part: &Part, value: u8) {
        let mut mask = BinaryImage::new(self.width, self.height);
        mask.draw(part);
        for (p, &m) in self.pixels.iter_mut().zip(&mask.pixels) {
            if m {
                *p = value;
            }
        }
    }

    /// `P5\n<width> <height>\n255\n` followed by one byte per pixel, row-major.
    pub fn write_pgm<W: Write>(&self, mut out: W) -> io::Result<()> {
        write!(out, "P5\n{} {}\n255\n", self.width, self.height)?;
        out.write_all(&self.pixels)
    }

    pub fn read_pgm<R: BufRead>(mut input: R) -> io::Result<Self> {
        let bad = |m: &str| io::Error::new(io::ErrorKind::InvalidData, m.to_string());
        let mut fields = Vec::new();
        while fields.len() < 4 {
            let mut line = String::new();
            if input.read_line(&mut line)? == 0 {
                return Err(bad("truncated PGM header"));
            }
            let line = line.split('#').next().unwrap_or("");
            fields.extend(line.split_whitespace().map(str::to_owned));
        }
        if fields[0] != "P5" || fields.len() != 4 {
            return Err(bad("expected a P5 header with one field group per line"));
        }
        let parse = |s: &str| s.parse::<usize>().map_err(|_| bad("bad PGM header field"));
        let (width, height, maxval) = (parse(&fields[1])?, parse(&fields[2])?, parse(&fields[3])?);
        if maxval != 255 {
            return Err(bad("only maxval 255 is supported"));
        }
        let mut pixels = vec![0u8; width * height];
        input.read_exact(&mut pixels)?;
        Ok(GrayImage { width, height, pixels })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn half_pixel_circle_is_one_pixel() {
        let img = BinaryImage::new(20, 20).rendered(&Part::Circle(CirclePose {
            x: 10.0,
            y: 10.0,
            r: 0.5,
        }));
        assert_eq!(img.count_white(), 1);
        assert!(img.get(10, 10));
    }

    #[test]
    fn link_symmetric_under_half_turn() {
        for &alpha in &[0.0, 0.3, 1.0, PI / 2.0, 2.5, 4.0] {
            let link = LinkPose {
                x: 50.3,
                y: 47.8,
                alpha,
                w: 56.0,
                h: 8.0,
            };
            let flipped = LinkPose {
                alpha: alpha + PI,
                ..link
            };
            let a = BinaryImage::new(100, 100).rendered(&Part::Link(link));
            let b = BinaryImage::new(100, 100).rendered(&Part::Link(flipped));
            assert_eq!(a, b, "alpha = {alpha}");
            assert!(a.count_white() > 400);
        }
    }

    #[test]
    fn axis_aligned_link_pixel_count() {
        // centres x in [22, 78], y in [46, 54]: 57 * 9 pixels
        let link = LinkPose {
            x: 50.0,
            y: 50.0,
            alpha: 0.0,
            w: 56.0,
            h: 8.0,
        };
        let img = BinaryImage::new(100, 100).rendered(&Part::Link(link));
        assert_eq!(img.count_white(), 57 * 9);
    }

    #[test]
    fn clipping_is_silent() {
        let img = BinaryImage::new(10, 10).rendered(&Part::Circle(CirclePose { x: 0.0, y: 0.0, r: 3.0 }));
        assert!(img.count_white() > 0 && img.count_white() < 29);
    }

    #[test]
    fn pgm_round_trip() {
        let img = BinaryImage::new(7, 5).rendered(&Part::Circle(CirclePose { x: 3.0, y: 2.0, r: 1.5 }));
        let mut bytes = Vec::new();
        img.write_pgm(&mut bytes).unwrap();
        assert!(bytes.starts_with(b"P5\n7 5\n255\n"));
        assert_eq!(bytes.len(), 11 + 35);
        assert_eq!(BinaryImage::read_pgm(&bytes[..]).unwrap(), img);
    }
}
