//! Fixture varieties with hand-checked properties.

use super::{make_variety, ParamVariety, VarietySpec};

fn build(name: &str, params: &[&str], additive: &[&str], multiplicative: &[&str], equations: &[&str]) -> ParamVariety {
    let own = |xs: &[&str]| xs.iter().map(|s| s.to_string()).collect();
    make_variety(&VarietySpec {
        name: name.into(),
        n: additive.len(),
        params: own(params),
        additive: own(additive),
        multiplicative: own(multiplicative),
        equations: own(equations),
    })
    .expect("catalog entries are valid")
}

/// `w = z`.
pub fn graph() -> ParamVariety {
    build("graph", &["u"], &["u"], &["u"], &["w1 - z1"])
}

/// `w = z + 1`.
pub fn line() -> ParamVariety {
    build("line", &["u"], &["u"], &["u + 1"], &["w1 - z1 - 1"])
}

/// `w = z^2`.
pub fn square() -> ParamVariety {
    build("square", &["u"], &["u"], &["u^2"], &["w1 - z1^2"])
}

/// `w^2 = 2 z`, the unique half of the graph.
pub fn parabola_half() -> ParamVariety {
    build("parabola-half", &["u"], &["u^2/2"], &["u"], &["2*z1 - w1^2"])
}

/// `graph x graph`.
pub fn product() -> ParamVariety {
    build("product", &["u1", "u2"], &["u1", "u2"], &["u1", "u2"], &["w1 - z1", "w2 - z2"])
}

/// `{z1 + t z2 = 0, w1 w2 = 1}` with `t` a base-field indeterminate: not
/// multiplicatively free, yet `(Id|0)` of its restriction has full dimension.
pub fn v_mn() -> ParamVariety {
    build("v-mn", &["s", "v"], &["-t*s", "s"], &["v", "1/v"], &["z1 + t*z2", "w1*w2 - 1"])
}

pub fn catalog() -> Vec<ParamVariety> {
    vec![graph(), line(), square(), parabola_half(), product(), v_mn()]
}
