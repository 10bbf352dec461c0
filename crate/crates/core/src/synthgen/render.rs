use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::corpus::GrayImage;
use crate::scalar::Scalar;

use super::font::BitmapFont;
use super::SynthError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StyleParams {
    /// Glyph magnification (nearest neighbour).
    pub scale: f64,
    /// Horizontal shift per row above the glyph bottom, in pixels per row.
    pub slant: f64,
    /// Ink dilation radius, 0 to 2.
    pub ink: u8,
    pub noise_sigma: f64,
    /// Maximum vertical offset per glyph, in pixels.
    pub baseline_jitter: u32,
    pub seed: u64,
    pub height: usize,
    /// Blank columns left and right of the text.
    pub margin: usize,
}

impl Default for StyleParams {
    fn default() -> Self {
        Self {
            scale: 1.0,
            slant: 0.0,
            ink: 0,
            noise_sigma: 0.0,
            baseline_jitter: 0,
            seed: 42,
            height: 32,
            margin: 4,
        }
    }
}

impl StyleParams {
    pub fn validate(&self) -> Result<(), SynthError> {
        let bad = |r: String| Err(SynthError::InvalidStyle(r));
        if !(self.scale.is_finite() && self.scale > 0.0) {
            return bad(format!("scale must be positive, got {}", self.scale));
        }
        if !self.slant.is_finite() {
            return bad("slant must be finite".into());
        }
        if self.ink > 2 {
            return bad(format!("ink radius must be 0..=2, got {}", self.ink));
        }
        if !(self.noise_sigma.is_finite() && self.noise_sigma >= 0.0) {
            return bad(format!("noise_sigma must be nonnegative, got {}", self.noise_sigma));
        }
        if self.height == 0 {
            return bad("height must be positive".into());
        }
        Ok(())
    }

    /// Same style with the seed for line `index` of a domain.
    pub fn for_line(&self, index: usize) -> Self {
        Self {
            seed: self.seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).wrapping_add(index as u64),
            ..self.clone()
        }
    }
}

fn scaled(n: usize, scale: f64) -> usize {
    ((n as f64 * scale).round() as usize).max(1)
}

/// Renders `text` as dark ink on a white canvas of `style.height` rows.
pub fn render_line<T: Scalar>(text: &str, font: &BitmapFont, style: &StyleParams) -> Result<GrayImage<T>, SynthError> {
    style.validate()?;
    let glyphs = text
        .chars()
        .map(|c| font.glyph(c).ok_or(SynthError::UnmappedChar { ch: c, line: None }))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rng = ChaCha8Rng::seed_from_u64(style.seed);

    let gh = scaled(font.height, style.scale);
    let spacing = if font.spacing == 0 {
        0
    } else {
        scaled(font.spacing, style.scale)
    };
    // shear offset for row y of a glyph; the bottom row stays put
    let shear = |y: usize| (style.slant * (gh - 1 - y) as f64).round() as i64;
    let (smin, smax) = (shear(gh - 1).min(shear(0)), shear(gh - 1).max(shear(0)));
    let pad = style.ink as usize;
    let text_w: usize =
        glyphs.iter().map(|g| scaled(g.width(), style.scale)).sum::<usize>() + spacing * glyphs.len().saturating_sub(1);
    let slack = if glyphs.is_empty() {
        0
    } else {
        (smax - smin) as usize + 2 * pad
    };
    let width = 2 * style.margin + text_w + slack;
    let height = style.height;

    let mut ink = vec![false; height * width];
    let top0 = (height as i64 - gh as i64) / 2;
    let mut x0 = (style.margin + pad) as i64 - smin;
    let jitter = style.baseline_jitter as i64;
    for g in &glyphs {
        let gw = scaled(g.width(), style.scale);
        let dy = if jitter > 0 {
            rng.random_range(-jitter..=jitter)
        } else {
            0
        };
        for y in 0..gh {
            let sy = y * font.height / gh;
            let py = top0 + dy + y as i64;
            if py < 0 || py >= height as i64 {
                continue;
            }
            for x in 0..gw {
                let sx = x * g.width() / gw;
                if g.rows[sy][sx] {
                    let px = x0 + x as i64 + shear(y);
                    if (0..width as i64).contains(&px) {
                        ink[py as usize * width + px as usize] = true;
                    }
                }
            }
        }
        x0 += (gw + spacing) as i64;
    }

    if pad > 0 {
        let src = ink.clone();
        let r = pad as i64;
        for y in 0..height as i64 {
            for x in 0..width as i64 {
                if src[(y as usize) * width + x as usize] {
                    continue;
                }
                let hit = (-r..=r).any(|dy| {
                    (-r..=r).any(|dx| {
                        let (ny, nx) = (y + dy, x + dx);
                        dy.abs() + dx.abs() <= r
                            && (0..height as i64).contains(&ny)
                            && (0..width as i64).contains(&nx)
                            && src[ny as usize * width + nx as usize]
                    })
                });
                if hit {
                    ink[y as usize * width + x as usize] = true;
                }
            }
        }
    }

    let noise = (style.noise_sigma > 0.0).then(|| Normal::new(0.0, style.noise_sigma).expect("sigma validated"));
    let pixels = ink
        .iter()
        .map(|&on| {
            let base = if on { 0.0 } else { 1.0 };
            let v = match &noise {
                Some(n) => (base + n.sample(&mut rng)).clamp(0.0, 1.0),
                None => base,
            };
            T::lit(v)
        })
        .collect();
    Ok(GrayImage::new(height, width, pixels).expect("dimensions computed above"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_text_is_blank_margin() {
        let s = StyleParams::default();
        let img: GrayImage<f32> = render_line("", &BitmapFont::builtin(), &s).unwrap();
        assert_eq!(img.dims(), (32, 8));
        assert!(img.pixels().iter().all(|&v| v == 1.0));
    }

    #[test]
    fn identity_style_pastes_the_glyph() {
        let font = BitmapFont::builtin();
        let s = StyleParams::default();
        let img: GrayImage<f64> = render_line("a", &font, &s).unwrap();
        let g = font.glyph('a').unwrap();
        assert_eq!(img.dims(), (32, 8 + g.width()));
        let top = (32 - 7) / 2;
        for y in 0..32 {
            for x in 0..img.width() {
                let inside = (top..top + 7).contains(&y) && (4..4 + g.width()).contains(&x);
                let expect = inside && g.rows[y - top][x - 4];
                assert_eq!(img.get(y, x) == 0.0, expect, "({y},{x})");
            }
        }
    }

    #[test]
    fn deterministic_with_every_effect_on() {
        let s = StyleParams {
            scale: 2.5,
            slant: 0.4,
            ink: 2,
            noise_sigma: 0.1,
            baseline_jitter: 2,
            seed: 9,
            ..StyleParams::default()
        };
        let font = BitmapFont::builtin();
        let a: GrayImage<f32> = render_line("Hello, world!", &font, &s).unwrap();
        let b: GrayImage<f32> = render_line("Hello, world!", &font, &s).unwrap();
        assert_eq!(a, b);
        assert!(a.pixels().iter().all(|&v| (0.0..=1.0).contains(&v)));
        let c: GrayImage<f32> = render_line("Hello, world!", &font, &s.for_line(1)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn dilation_adds_ink() {
        let font = BitmapFont::builtin();
        let count = |ink| {
            let s = StyleParams {
                ink,
                ..StyleParams::default()
            };
            let img: GrayImage<f64> = render_line("mix", &font, &s).unwrap();
            img.pixels().iter().filter(|&&v| v == 0.0).count()
        };
        assert!(count(0) < count(1) && count(1) < count(2));
    }

    #[test]
    fn scale_changes_glyph_height() {
        let font = BitmapFont::builtin();
        let s = StyleParams {
            scale: 3.0,
            ..StyleParams::default()
        };
        let img: GrayImage<f64> = render_line("|", &font, &s).unwrap();
        let inked_rows = (0..img.height())
            .filter(|&y| (0..img.width()).any(|x| img.get(y, x) == 0.0))
            .count();
        assert_eq!(inked_rows, 21);
    }

    #[test]
    fn errors() {
        let font = BitmapFont::builtin();
        assert!(matches!(
            render_line::<f32>("naïve", &font, &StyleParams::default()),
            Err(SynthError::UnmappedChar { ch: 'ï', .. })
        ));
        let s = StyleParams {
            scale: 0.0,
            ..StyleParams::default()
        };
        assert!(render_line::<f32>("a", &font, &s).is_err());
        let s = StyleParams {
            ink: 3,
            ..StyleParams::default()
        };
        assert!(render_line::<f32>("a", &font, &s).is_err());
    }
}
