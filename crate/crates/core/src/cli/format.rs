//! Number formatting for `key=value` result lines.

use clap::ValueEnum;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Precision {
    /// Probabilities to 6 significant digits, throughput in Mbps to 0.1.
    #[default]
    Short,
    /// Shortest representation that parses back to the same `f64`.
    Full,
}

/// `x` to `digits` significant digits with trailing zeros removed.
pub fn significant(x: f64, digits: usize) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    let decimals = digits as i32 - 1 - magnitude;
    if !(0..=17).contains(&decimals) {
        return format!("{:.*e}", digits - 1, x);
    }
    let s = format!("{:.*}", decimals as usize, x);
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl Precision {
    pub fn prob(self, p: f64) -> String {
        match self {
            Precision::Short => significant(p, 6),
            Precision::Full => format!("{p}"),
        }
    }

    /// Bit/s rendered as Mbps.
    pub fn mbps(self, bps: f64) -> String {
        match self {
            Precision::Short => format!("{:.1}", bps / 1e6),
            Precision::Full => format!("{}", bps / 1e6),
        }
    }

    /// Lengths and other plain quantities.
    pub fn num(self, x: f64) -> String {
        match self {
            Precision::Short => significant(x, 6),
            Precision::Full => format!("{x}"),
        }
    }
}
