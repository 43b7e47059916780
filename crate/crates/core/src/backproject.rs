//! Back-projection of a banding pattern onto a chromosome shape, producing
//! a banded segmentation mask.

use crate::banding::{extract_banding_pattern, BandingPattern, ExtractParams, Extraction};
use crate::density_profile::SamplingFrame;
use crate::error::{Error, Result};
use crate::imagecore::{BandedMask, GrayImage, ShapeMask, BLACK, WHITE};

/// Paint `bp[k]` along every pixel of `P_k` (later `k` overwrite earlier
/// ones), then give each foreground pixel that no line touched the code of
/// its nearest painted pixel. Nearest is Euclidean; ties go to the
/// row-major-smaller source pixel. Background stays 255.
pub fn render_banded_mask(
    bp: &BandingPattern,
    mask: &ShapeMask,
    frame: &SamplingFrame,
) -> Result<BandedMask> {
    if bp.len() != frame.len() {
        return Err(Error::LengthMismatch {
            pattern: bp.len(),
            frame: frame.len(),
        });
    }
    frame.check_against(mask)?;
    let (w, h) = mask.dims();
    let mut out = BandedMask::background(w, h);
    let mut painted = vec![false; w * h];
    for (&bit, line) in bp.bits().iter().zip(&frame.lines) {
        let code = if bit == 1 { BLACK } else { WHITE };
        for &(r, c) in line {
            out.set(r, c, code);
            painted[r * w + c] = true;
        }
    }
    let holes: Vec<(usize, usize)> = mask
        .pixels()
        .filter(|&(r, c)| !painted[r * w + c])
        .collect();
    let fills: Vec<u8> = holes
        .iter()
        .map(|&(r, c)| {
            let (sr, sc) = nearest_painted(&painted, w, h, r, c)
                .expect("a non-empty frame paints at least one pixel");
            out.get(sr, sc)
        })
        .collect();
    for (&(r, c), code) in holes.iter().zip(fills) {
        out.set(r, c, code);
    }
    Ok(out)
}

/// Exact nearest painted pixel by expanding Chebyshev rings; a ring at
/// radius `R` only holds pixels at distance >= `R`, so the search stops
/// once `R^2` exceeds the best squared distance found.
fn nearest_painted(
    painted: &[bool],
    w: usize,
    h: usize,
    r: usize,
    c: usize,
) -> Option<(usize, usize)> {
    let (r, c) = (r as isize, c as isize);
    let max_radius = w.max(h) as isize;
    let mut best: Option<(isize, (usize, usize))> = None;
    for radius in 1..=max_radius {
        if let Some((d2, _)) = best {
            if radius * radius > d2 {
                break;
            }
        }
        let mut visit = |rr: isize, cc: isize| {
            if rr < 0 || cc < 0 || rr >= h as isize || cc >= w as isize {
                return;
            }
            if !painted[rr as usize * w + cc as usize] {
                return;
            }
            let d2 = (rr - r).pow(2) + (cc - c).pow(2);
            let cand = (d2, (rr as usize, cc as usize));
            if best.is_none_or(|b| cand < b) {
                best = Some(cand);
            }
        };
        for dc in -radius..=radius {
            visit(r - radius, c + dc);
            visit(r + radius, c + dc);
        }
        for dr in -radius + 1..radius {
            visit(r + dr, c - radius);
            visit(r + dr, c + radius);
        }
    }
    best.map(|(_, p)| p)
}

/// A paired training sample `(x̂, y)` built from one real chromosome image.
#[derive(Debug, Clone)]
pub struct TrainingPair {
    pub mask: BandedMask,
    pub image: GrayImage,
    pub extraction: Extraction,
}

/// Extract the banding pattern of `image` and render it back onto the same
/// shape through the same sampling frame.
pub fn build_pair(image: &GrayImage, params: &ExtractParams) -> Result<TrainingPair> {
    let extraction = extract_banding_pattern(image, params)?;
    let mask = render_banded_mask(&extraction.pattern, &extraction.mask, extraction.frame())?;
    Ok(TrainingPair {
        mask,
        image: image.clone(),
        extraction,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::banding::shape_geometry;
    use crate::imagecore::BACKGROUND;

    fn bar_image(len: usize, height: usize, dark_until: usize) -> GrayImage {
        GrayImage::from_fn(len + 20, height + 20, |r, c| {
            if (10..10 + height).contains(&r) && (10..10 + len).contains(&c) {
                if c - 10 < dark_until {
                    40
                } else {
                    150
                }
            } else {
                255
            }
        })
    }

    fn bar_geometry(len: usize, height: usize) -> (ShapeMask, SamplingFrame) {
        let mask = ShapeMask::from_fn(len + 20, height + 20, |r, c| {
            (10..10 + height).contains(&r) && (10..10 + len).contains(&c)
        });
        let g = shape_geometry(&mask, &ExtractParams::default()).unwrap();
        (mask, g.frame)
    }

    #[test]
    fn all_black_pattern_fills_foreground() {
        let (mask, frame) = bar_geometry(40, 10);
        let bp = BandingPattern::new(vec![1; frame.len()]).unwrap();
        let out = render_banded_mask(&bp, &mask, &frame).unwrap();
        for r in 0..mask.height() {
            for c in 0..mask.width() {
                let expect = if mask.get(r, c) { BLACK } else { BACKGROUND };
                assert_eq!(out.get(r, c), expect);
            }
        }
    }

    #[test]
    fn half_and_half_pattern() {
        let (mask, frame) = bar_geometry(40, 10);
        let k = frame.len();
        assert!((40..=41).contains(&k));
        let bits: Vec<u8> = (0..k).map(|i| u8::from(i < k / 2)).collect();
        let bp = BandingPattern::new(bits).unwrap();
        let out = render_banded_mask(&bp, &mask, &frame).unwrap();
        // the path may run either way along the bar; check halves are uniform
        let left: Vec<u8> = (10..20).flat_map(|r| (10..29).map(move |c| (r, c))).map(|(r, c)| out.get(r, c)).collect();
        let right: Vec<u8> = (10..20).flat_map(|r| (31..50).map(move |c| (r, c))).map(|(r, c)| out.get(r, c)).collect();
        assert!(left.iter().all(|&v| v == left[0]));
        assert!(right.iter().all(|&v| v == right[0]));
        assert_ne!(left[0], right[0]);
        assert_eq!(out.get(0, 0), BACKGROUND);
    }

    #[test]
    fn length_mismatch() {
        let (mask, frame) = bar_geometry(30, 8);
        let bp = BandingPattern::new(vec![1; frame.len() + 1]).unwrap();
        assert!(matches!(
            render_banded_mask(&bp, &mask, &frame),
            Err(Error::LengthMismatch { .. })
        ));
    }

    #[test]
    fn frame_from_other_mask_is_rejected() {
        let (_, frame) = bar_geometry(30, 8);
        let other = ShapeMask::from_fn(50, 28, |r, c| r < 3 && c < 3);
        let bp = BandingPattern::new(vec![1; frame.len()]).unwrap();
        assert!(matches!(
            render_banded_mask(&bp, &other, &frame),
            Err(Error::FrameMismatch(_))
        ));
    }

    /// Curved shape (quarter annulus) where the outer bend is under-sampled.
    fn arc_mask() -> ShapeMask {
        ShapeMask::from_fn(70, 70, |r, c| {
            let (dr, dc) = (r as f64 - 5.0, c as f64 - 5.0);
            let d = dr.hypot(dc);
            (35.0..=50.0).contains(&d) && dr >= 0.0 && dc >= 0.0
        })
    }

    #[test]
    fn curved_holes_match_brute_force_fill() {
        let mask = arc_mask();
        let frame = shape_geometry(&mask, &ExtractParams::default()).unwrap().frame;
        let bits: Vec<u8> = (0..frame.len()).map(|k| u8::from((k / 7) % 2 == 0)).collect();
        let bp = BandingPattern::new(bits).unwrap();
        let out = render_banded_mask(&bp, &mask, &frame).unwrap();

        let (w, h) = mask.dims();
        let mut code = vec![None; w * h];
        for (&bit, line) in bp.bits().iter().zip(&frame.lines) {
            for &(r, c) in line {
                code[r * w + c] = Some(if bit == 1 { BLACK } else { WHITE });
            }
        }
        let painted: Vec<(usize, usize, u8)> = (0..h)
            .flat_map(|r| (0..w).map(move |c| (r, c)))
            .filter_map(|(r, c)| code[r * w + c].map(|v| (r, c, v)))
            .collect();
        let mut holes = 0;
        for (r, c) in mask.pixels() {
            let expect = match code[r * w + c] {
                Some(v) => v,
                None => {
                    holes += 1;
                    painted
                        .iter()
                        .min_by_key(|&&(pr, pc, _)| {
                            ((pr as i64 - r as i64).pow(2) + (pc as i64 - c as i64).pow(2), pr, pc)
                        })
                        .unwrap()
                        .2
                }
            };
            assert_eq!(out.get(r, c), expect, "pixel ({r}, {c})");
        }
        assert!(holes > 0, "arc should leave unsampled pixels");
        assert_eq!(out.foreground(), mask);
    }

    #[test]
    fn pair_of_striped_bar() {
        let img = bar_image(48, 12, 24);
        let pair = build_pair(&img, &ExtractParams::default()).unwrap();
        assert_eq!(pair.image, img);
        assert_eq!(pair.mask.foreground(), crate::imagecore::binarize(&img).unwrap());
        let (r, c) = (15, 15);
        assert_eq!(pair.mask.get(r, c), BLACK);
        assert_eq!(pair.mask.get(r, 50), WHITE);
        assert_eq!(pair.extraction.pattern.runs().len(), 2);
    }

    #[test]
    fn pair_of_blank_image_fails() {
        assert!(build_pair(&GrayImage::filled(20, 20, 255), &ExtractParams::default()).is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn foreground_exact_and_deterministic(seed in any::<u64>(), len in 20usize..80, height in 5usize..20, bend in 0.0f64..0.6) {
                let mask = ShapeMask::from_fn(len + 30, len + 30, |r, c| {
                    let x = c as f64 - 10.0;
                    let center = 12.0 + bend * x * x / len as f64;
                    x >= 0.0 && x < len as f64 && (r as f64 - center).abs() <= height as f64 / 2.0
                });
                prop_assume!(crate::imagecore::components(&mask).len() == 1);
                let frame = shape_geometry(&mask, &ExtractParams::default()).unwrap().frame;
                let mut s = seed | 1;
                let bits: Vec<u8> = (0..frame.len()).map(|_| { s = s.wrapping_mul(6364136223846793005).wrapping_add(1); (s >> 63) as u8 }).collect();
                let bp = BandingPattern::new(bits).unwrap();
                let a = render_banded_mask(&bp, &mask, &frame).unwrap();
                let b = render_banded_mask(&bp, &mask, &frame).unwrap();
                prop_assert_eq!(a.foreground(), mask);
                prop_assert_eq!(a, b);
            }
        }
    }
}
