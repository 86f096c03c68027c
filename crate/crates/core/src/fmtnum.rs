//! Number formatting for CSV and report output: 12 significant digits,
//! shortest form, deterministic across platforms.

use crate::numeric::TowerValue;

/// Like C's `%.12g`.
pub fn g12(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mant, exp) = sci.split_once('e').unwrap();
    let exp: i32 = exp.parse().unwrap();
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(&format!("{:.*}", decimals, x))
    } else {
        format!("{}e{}{:02}", trim_zeros(mant), if exp < 0 { '-' } else { '+' }, exp.abs())
    }
}

fn trim_zeros(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

/// A tower as a plain number when it fits, else `exp^m(r)`.
pub fn tower_g12(t: &TowerValue) -> String {
    let x = t.to_f64();
    if x.is_finite() {
        g12(x)
    } else {
        format!("exp^{}({})", t.level(), g12(t.mantissa()))
    }
}
