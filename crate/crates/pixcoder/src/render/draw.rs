//! Tree -> raster drawing.
//!
//! Canvas split: the row stack takes the top 80% divided into `max_rows`
//! fixed slots, the footer takes the bottom 20%. A row's controls share its
//! width evenly. Jitter is derived per control from (seed, block, slot), so
//! changing one control never disturbs the pixels of another.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dsl::{DslTree, Grammar};

use super::theme::{base_hsv, hsv_to_rgb, RenderTheme};
use super::{RasterImage, RenderError};

/// Sliders render at this fraction of the full row width; four of them can
/// never fit, which is exactly the overflow the pruned tables rule out.
const SLIDER_WIDTH_FRAC: f32 = 0.26;

#[derive(Debug, Clone, Copy)]
struct Rect {
    x0: usize,
    y0: usize,
    x1: usize,
    y1: usize,
}

impl Rect {
    fn width(&self) -> usize {
        self.x1.saturating_sub(self.x0)
    }

    fn height(&self) -> usize {
        self.y1.saturating_sub(self.y0)
    }

    fn shrink(&self, dx: usize, dy: usize) -> Rect {
        Rect {
            x0: (self.x0 + dx).min(self.x1),
            y0: (self.y0 + dy).min(self.y1),
            x1: self.x1.saturating_sub(dx).max(self.x0),
            y1: self.y1.saturating_sub(dy).max(self.y0),
        }
    }
}

fn fill_rect(img: &mut RasterImage, r: Rect, color: [f32; 3]) {
    for y in r.y0..r.y1.min(img.height()) {
        for x in r.x0..r.x1.min(img.width()) {
            img.set_pixel(x, y, color);
        }
    }
}

fn outline_rect(img: &mut RasterImage, r: Rect, color: [f32; 3], t: usize) {
    if r.width() == 0 || r.height() == 0 {
        return;
    }
    fill_rect(img, Rect { x1: r.x1, y1: (r.y0 + t).min(r.y1), ..r }, color);
    fill_rect(img, Rect { y0: r.y1.saturating_sub(t).max(r.y0), ..r }, color);
    fill_rect(img, Rect { x1: (r.x0 + t).min(r.x1), ..r }, color);
    fill_rect(img, Rect { x0: r.x1.saturating_sub(t).max(r.x0), ..r }, color);
}

fn diagonal(img: &mut RasterImage, r: Rect, color: [f32; 3], rising: bool) {
    let (w, h) = (r.width(), r.height());
    if w == 0 || h == 0 {
        return;
    }
    let steps = w.max(h);
    for s in 0..=steps {
        let x = r.x0 + s * (w - 1).max(1) / steps.max(1);
        let yo = s * (h - 1).max(1) / steps.max(1);
        let y = if rising { r.y1 - 1 - yo } else { r.y0 + yo };
        if x < img.width() && y < img.height() {
            img.set_pixel(x, y, color);
        }
    }
}

fn darker(c: [f32; 3]) -> [f32; 3] {
    [c[0] * 0.55, c[1] * 0.55, c[2] * 0.55]
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn control_seed(seed: u64, block: u64, slot: u64) -> u64 {
    splitmix64(seed ^ splitmix64(block.wrapping_mul(0x9E37_79B9_7F4A_7C15) ^ slot))
}

fn blocks<'t>(tree: &'t DslTree, grammar: &Grammar) -> (Vec<&'t DslTree>, &'t DslTree) {
    if grammar.has_stack() {
        let stack = &tree.children()[0];
        (stack.children().iter().collect(), &tree.children()[1])
    } else {
        let n = tree.children().len();
        (tree.children()[..n - 1].iter().collect(), &tree.children()[n - 1])
    }
}

/// Render a grammar-valid tree at `size` x `size` pixels.
pub fn render(
    tree: &DslTree,
    grammar: &Grammar,
    theme: &RenderTheme,
    seed: u64,
    size: usize,
) -> Result<RasterImage, RenderError> {
    debug_assert!(grammar.accepts(tree), "render precondition: valid tree");
    let mut img = RasterImage::filled(size, size, theme.background);
    let stack_h = size * 4 / 5;
    let row_h = stack_h / grammar.max_rows();
    let (rows, footer) = blocks(tree, grammar);

    for (r, row) in rows.iter().enumerate() {
        let rect = Rect {
            x0: 0,
            y0: r * row_h,
            x1: size,
            y1: r * row_h + row_h,
        };
        draw_block(&mut img, row, rect, r, theme, seed, size)?;
    }

    // Divider between the stack area and the footer strip.
    fill_rect(
        &mut img,
        Rect { x0: 0, y0: stack_h, x1: size, y1: stack_h + size / 128 + 1 },
        theme.divider,
    );
    let footer_rect = Rect { x0: 0, y0: stack_h + size / 128 + 1, x1: size, y1: size };
    draw_block(&mut img, footer, footer_rect, grammar.max_rows(), theme, seed, size)?;
    Ok(img)
}

fn draw_block(
    img: &mut RasterImage,
    block: &DslTree,
    rect: Rect,
    block_index: usize,
    theme: &RenderTheme,
    seed: u64,
    size: usize,
) -> Result<(), RenderError> {
    let m = block.children().len();
    for (slot, control) in block.children().iter().enumerate() {
        let x0 = rect.x0 + (slot as f32 / m as f32 * rect.width() as f32).round() as usize;
        let x1 = rect.x0 + ((slot + 1) as f32 / m as f32 * rect.width() as f32).round() as usize;
        let cell = Rect { x0, y0: rect.y0, x1, y1: rect.y1 };
        let pad_x = (cell.width() as f32 * 0.08) as usize;
        let pad_y = (cell.height() as f32 * 0.18) as usize;
        let inner = cell.shrink(pad_x.max(1), pad_y.max(1));
        let mut rng = ChaCha8Rng::seed_from_u64(control_seed(seed, block_index as u64, slot as u64));
        let hue_off = rng.gen_range(-theme.hue_jitter_deg..=theme.hue_jitter_deg);
        let width_mult = 1.0 + rng.gen_range(-theme.text_width_jitter..=theme.text_width_jitter);
        let knob = rng.gen_range(0.15..0.85f32);
        let (h, s, v) = base_hsv(control.label());
        let color = hsv_to_rgb(h + hue_off, s, v);
        draw_control(
            img,
            control.label(),
            inner,
            color,
            width_mult,
            knob,
            block_index,
            size,
        )?;
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn draw_control(
    img: &mut RasterImage,
    token: &str,
    inner: Rect,
    color: [f32; 3],
    width_mult: f32,
    knob: f32,
    block_index: usize,
    size: usize,
) -> Result<(), RenderError> {
    let w = inner.width();
    let h = inner.height();
    if w == 0 || h == 0 {
        return Ok(());
    }
    let bar = |frac_w: f32, frac_y: f32, frac_h: f32| -> Rect {
        let bw = ((w as f32 * frac_w).clamp(2.0, w as f32)) as usize;
        Rect {
            x0: inner.x0,
            y0: inner.y0 + (h as f32 * frac_y) as usize,
            x1: inner.x0 + bw,
            y1: inner.y0 + ((h as f32 * (frac_y + frac_h)) as usize).min(h),
        }
    };
    match token {
        "label" => fill_rect(img, bar(0.72 * width_mult, 0.36, 0.28), color),
        "title" => {
            fill_rect(img, bar(0.80 * width_mult, 0.10, 0.34), color);
            fill_rect(img, bar(0.55 * width_mult, 0.58, 0.16), darker(color));
        }
        "text" => {
            for i in 0..3 {
                fill_rect(img, bar(0.85 * width_mult, 0.08 + 0.32 * i as f32, 0.14), color);
            }
        }
        "slider" => {
            // Fixed absolute width: the one control that can overflow.
            let track_w = (SLIDER_WIDTH_FRAC * size as f32) as usize;
            if track_w > w {
                return Err(RenderError::LayoutOverflow { row: block_index + 1 });
            }
            let x0 = inner.x0 + (w - track_w) / 2;
            let cy = inner.y0 + h / 2;
            fill_rect(
                img,
                Rect { x0, y0: cy.saturating_sub(h / 12).max(inner.y0), x1: x0 + track_w, y1: cy + h / 12 + 1 },
                color,
            );
            let k = (h as f32 * 0.34) as usize;
            let kx = x0 + ((track_w - k.min(track_w)) as f32 * knob) as usize;
            fill_rect(
                img,
                Rect { x0: kx, y0: cy.saturating_sub(k / 2).max(inner.y0), x1: kx + k, y1: (cy + k / 2).min(inner.y1) },
                darker(color),
            );
        }
        "switch" => {
            let pill = Rect {
                x0: inner.x0,
                y0: inner.y0 + h / 4,
                x1: inner.x0 + (w as f32 * 0.42).max(4.0) as usize,
                y1: inner.y1 - h / 4,
            };
            fill_rect(img, pill, color);
            let k = pill.height();
            fill_rect(
                img,
                Rect { x0: pill.x1.saturating_sub(k), y0: pill.y0, x1: pill.x1, y1: pill.y1 },
                [1.0, 1.0, 1.0],
            );
        }
        "img" => {
            outline_rect(img, inner, color, (size / 128).max(1));
            diagonal(img, inner, color, false);
            diagonal(img, inner, color, true);
        }
        "check" => {
            let side = (h as f32 * 0.6) as usize;
            let r = Rect { x0: inner.x0, y0: inner.y0 + (h - side) / 2, x1: inner.x0 + side, y1: inner.y0 + (h + side) / 2 };
            outline_rect(img, r, color, (size / 170).max(1));
            fill_rect(img, r.shrink(side / 4, side / 4), color);
        }
        "rating" => {
            let n = 4;
            let side = (h as f32 * 0.4) as usize;
            for i in 0..n {
                let x0 = inner.x0 + i * w / n;
                let r = Rect { x0, y0: inner.y0 + (h - side) / 2, x1: x0 + side.min(w / n), y1: inner.y0 + (h + side) / 2 };
                if i < 3 {
                    fill_rect(img, r, color);
                } else {
                    outline_rect(img, r, color, (size / 256).max(1));
                }
            }
        }
        // Button family: solid base plus a per-token glyph strip.
        token => {
            let base = Rect {
                x0: inner.x0,
                y0: inner.y0 + h / 5,
                x1: inner.x1,
                y1: inner.y1 - h / 5,
            };
            fill_rect(img, base, color);
            outline_rect(img, base, darker(color), (size / 256).max(1));
            let glyphs = match token {
                "btn" => 1,
                "btn-home" | "tab-home" | "link-home" => 1,
                "btn-search" | "tab-search" | "link-about" => 2,
                "btn-contact" | "tab-profile" | "link-contact" => 3,
                "btn-download" | "tab-settings" => 4,
                _ => 1,
            };
            let g = (base.height() as f32 * 0.3).max(2.0) as usize;
            for i in 0..glyphs {
                let x0 = base.x0 + 2 + i * (g + 2);
                if x0 + g < base.x1 {
                    fill_rect(
                        img,
                        Rect { x0, y0: base.y0 + 2, x1: x0 + g, y1: (base.y0 + 2 + g).min(base.y1) },
                        [1.0, 1.0, 1.0],
                    );
                }
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::codec::{layout_for, sample_tree};
    use crate::dsl::{parse, Platform};

    fn ios_grammar() -> Grammar {
        Grammar::for_platform(Platform::Ios, true)
    }

    #[test]
    fn rendering_is_deterministic() {
        let g = ios_grammar();
        let t = parse("body { stack { row { label slider label } } footer { btn-home btn-search } }")
            .unwrap();
        let theme = RenderTheme::default();
        let a = render(&t, &g, &theme, 42, 256).unwrap();
        let b = render(&t, &g, &theme, 42, 256).unwrap();
        assert_eq!(a, b);
        let c = render(&t, &g, &theme, 43, 256).unwrap();
        assert_ne!(a, c, "different seed should jitter pixels");
    }

    #[test]
    fn single_control_change_stays_inside_its_row() {
        let g = ios_grammar();
        let theme = RenderTheme::default();
        let a = parse("body { stack { row { label btn } row { img label } } footer { btn-home btn-search } }").unwrap();
        let b = parse("body { stack { row { label switch } row { img label } } footer { btn-home btn-search } }").unwrap();
        let ia = render(&a, &g, &theme, 9, 256).unwrap();
        let ib = render(&b, &g, &theme, 9, 256).unwrap();
        let row_h = (256 * 4 / 5) / 8;
        let mut diff_rows = Vec::new();
        for y in 0..256 {
            for x in 0..256 {
                if ia.pixel(x, y) != ib.pixel(x, y) {
                    diff_rows.push(y);
                    break;
                }
            }
        }
        assert!(!diff_rows.is_empty());
        // Changed control is in row 1 (slot 2): all diffs inside that row band,
        // and in its right half.
        assert!(diff_rows.iter().all(|&y| y < row_h));
        for &y in &diff_rows {
            for x in 0..128 {
                assert_eq!(ia.pixel(x, y), ib.pixel(x, y), "left half must not change");
            }
        }
    }

    #[test]
    fn pruned_trees_never_overflow() {
        use rand::SeedableRng;
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(31);
        let theme = RenderTheme::default();
        for platform in Platform::ALL {
            let layout = layout_for(platform, true);
            for i in 0..200 {
                let tree = sample_tree(&layout, &mut rng);
                render(&tree, layout.grammar(), &theme, i, 128).unwrap();
            }
        }
    }

    #[test]
    fn four_sliders_overflow() {
        let g = Grammar::for_platform(Platform::Ios, false);
        let t = parse("body { stack { row { slider slider slider slider } } footer { btn-home } }")
            .unwrap();
        assert!(g.accepts(&t), "unpruned grammar admits four sliders");
        let err = render(&t, &g, &RenderTheme::default(), 1, 256).unwrap_err();
        assert!(matches!(err, RenderError::LayoutOverflow { row: 1 }));
    }
}
