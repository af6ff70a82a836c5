//! Visual theme: per-token colors and jitter ranges.

/// Colors and jitter bounds the renderer draws with. Every control token
/// keeps a distinct hue and glyph shape, so zero-jitter renders of different
/// tokens never collide.
#[derive(Debug, Clone, PartialEq)]
pub struct RenderTheme {
    pub background: [f32; 3],
    pub divider: [f32; 3],
    /// Text-like bar widths vary by this fraction (+/-).
    pub text_width_jitter: f32,
    /// Hues rotate by up to this many degrees (+/-).
    pub hue_jitter_deg: f32,
}

impl Default for RenderTheme {
    fn default() -> Self {
        Self {
            background: [0.96, 0.96, 0.97],
            divider: [0.80, 0.80, 0.82],
            text_width_jitter: 0.3,
            hue_jitter_deg: 10.0,
        }
    }
}

/// Base (hue degrees, saturation, value) per token, before jitter.
pub(crate) fn base_hsv(token: &str) -> (f32, f32, f32) {
    match token {
        "label" => (210.0, 0.55, 0.75),
        "title" => (225.0, 0.70, 0.50),
        "text" => (210.0, 0.12, 0.55),
        "btn" => (120.0, 0.65, 0.70),
        "switch" => (175.0, 0.70, 0.70),
        "slider" => (275.0, 0.60, 0.70),
        "img" => (30.0, 0.75, 0.85),
        "check" => (90.0, 0.70, 0.70),
        "rating" => (50.0, 0.90, 0.90),
        "link-home" => (0.0, 0.65, 0.80),
        "link-about" => (320.0, 0.60, 0.75),
        "link-contact" => (195.0, 0.70, 0.75),
        "btn-home" => (5.0, 0.70, 0.80),
        "btn-search" => (230.0, 0.65, 0.80),
        "btn-contact" => (190.0, 0.70, 0.75),
        "btn-download" => (140.0, 0.65, 0.70),
        "tab-home" => (10.0, 0.75, 0.75),
        "tab-search" => (240.0, 0.60, 0.75),
        "tab-profile" => (310.0, 0.65, 0.70),
        "tab-settings" => (25.0, 0.60, 0.60),
        _ => (0.0, 0.0, 0.35),
    }
}

pub(crate) fn hsv_to_rgb(h_deg: f32, s: f32, v: f32) -> [f32; 3] {
    let h = h_deg.rem_euclid(360.0) / 60.0;
    let c = v * s;
    let x = c * (1.0 - (h % 2.0 - 1.0).abs());
    let (r, g, b) = match h as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r + m, g + m, b + m]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::UNION_ALPHABET;

    #[test]
    fn control_tokens_have_distinct_base_colors() {
        let controls: Vec<&str> = UNION_ALPHABET
            .iter()
            .copied()
            .filter(|t| !matches!(*t, "body" | "stack" | "row" | "footer"))
            .collect();
        for (i, a) in controls.iter().enumerate() {
            for b in &controls[i + 1..] {
                assert_ne!(base_hsv(a), base_hsv(b), "{a} vs {b}");
            }
        }
    }

    #[test]
    fn hsv_primaries() {
        assert_eq!(hsv_to_rgb(0.0, 1.0, 1.0), [1.0, 0.0, 0.0]);
        let g = hsv_to_rgb(120.0, 1.0, 1.0);
        assert!((g[1] - 1.0).abs() < 1e-6 && g[0].abs() < 1e-6);
        let gray = hsv_to_rgb(123.0, 0.0, 0.5);
        assert!((gray[0] - 0.5).abs() < 1e-6 && (gray[1] - 0.5).abs() < 1e-6);
    }
}
