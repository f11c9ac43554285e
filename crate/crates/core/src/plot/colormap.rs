/// A piecewise-linear RGB ramp over a value range.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorMap {
    name: String,
    colors: Vec<[u8; 3]>,
    vmin: f64,
    vmax: f64,
}

const VIRIDIS: [u32; 11] = [
    0x440154, 0x482475, 0x414487, 0x355f8d, 0x2a788e, 0x21918c, 0x22a884, 0x44bf70, 0x7ad151, 0xbddf26, 0xfde725,
];
const GRAY: [u32; 2] = [0x000000, 0xffffff];
const COOLWARM: [u32; 3] = [0x3b4cc0, 0xdddddd, 0xb40426];

fn rgb(c: u32) -> [u8; 3] {
    [(c >> 16) as u8, (c >> 8) as u8, c as u8]
}

impl ColorMap {
    /// Builds a map from at least two control colors, evenly spaced, with
    /// range (0, 1).
    pub fn new(name: impl Into<String>, colors: Vec<[u8; 3]>) -> ColorMap {
        assert!(colors.len() >= 2, "a colormap needs at least two colors");
        ColorMap {
            name: name.into(),
            colors,
            vmin: 0.0,
            vmax: 1.0,
        }
    }

    /// Perceptually uniform dark-blue to yellow ramp (the default).
    pub fn viridis() -> ColorMap {
        ColorMap::new("viridis", VIRIDIS.iter().map(|&c| rgb(c)).collect())
    }

    pub fn gray() -> ColorMap {
        ColorMap::new("gray", GRAY.iter().map(|&c| rgb(c)).collect())
    }

    /// Diverging blue-gray-red ramp.
    pub fn coolwarm() -> ColorMap {
        ColorMap::new("coolwarm", COOLWARM.iter().map(|&c| rgb(c)).collect())
    }

    pub fn by_name(name: &str) -> Option<ColorMap> {
        match name {
            "viridis" => Some(ColorMap::viridis()),
            "gray" | "grey" => Some(ColorMap::gray()),
            "coolwarm" => Some(ColorMap::coolwarm()),
            _ => None,
        }
    }

    pub const NAMES: [&'static str; 3] = ["viridis", "gray", "coolwarm"];

    /// Sets the value range. An empty range `v == v` becomes `(v - 0.5, v + 0.5)`;
    /// reversed bounds are swapped.
    pub fn with_range(mut self, vmin: f64, vmax: f64) -> ColorMap {
        let (lo, hi) = if vmin <= vmax { (vmin, vmax) } else { (vmax, vmin) };
        if lo == hi {
            self.vmin = lo - 0.5;
            self.vmax = hi + 0.5;
        } else {
            self.vmin = lo;
            self.vmax = hi;
        }
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn range(&self) -> (f64, f64) {
        (self.vmin, self.vmax)
    }

    pub fn control_colors(&self) -> &[[u8; 3]] {
        &self.colors
    }

    /// Normalised position of `v` in the range, clamped to [0, 1].
    pub fn position(&self, v: f64) -> f64 {
        let t = (v - self.vmin) / (self.vmax - self.vmin);
        if t.is_nan() {
            0.0
        } else {
            t.clamp(0.0, 1.0)
        }
    }

    /// Color at normalised position `t` in [0, 1].
    pub fn color_at(&self, t: f64) -> [u8; 3] {
        let n = self.colors.len() - 1;
        let x = t.clamp(0.0, 1.0) * n as f64;
        let k = (x.floor() as usize).min(n - 1);
        let f = x - k as f64;
        let (a, b) = (self.colors[k], self.colors[k + 1]);
        std::array::from_fn(|i| (a[i] as f64 + f * (b[i] as f64 - a[i] as f64)).round() as u8)
    }

    pub fn color(&self, v: f64) -> [u8; 3] {
        self.color_at(self.position(v))
    }

    /// `#rrggbb` color of value `v`.
    pub fn hex(&self, v: f64) -> String {
        hex(self.color(v))
    }
}

impl Default for ColorMap {
    fn default() -> Self {
        ColorMap::viridis()
    }
}

pub(crate) fn hex(c: [u8; 3]) -> String {
    format!("#{:02x}{:02x}{:02x}", c[0], c[1], c[2])
}
