//! Built-in families and the bundled example configs.

use crate::LabError;

/// `(name, JSON)` of every bundled example.
pub const EXAMPLES: &[(&str, &str)] = &[
    ("two_point_swap", include_str!("../configs/two_point_swap.json")),
    ("doubling_circle", include_str!("../configs/doubling_circle.json")),
    ("shift_pressure", include_str!("../configs/shift_pressure.json")),
    ("shift_to_doubling_factor", include_str!("../configs/shift_to_doubling_factor.json")),
    ("quotient", include_str!("../configs/quotient.json")),
    ("mixed_circle_sweep", include_str!("../configs/mixed_circle_sweep.json")),
];

const MAPS: &[(&str, &str)] = &[
    ("identity", "any space"),
    ("affine_mod1", "x -> a x + b mod 1; circle"),
    ("affine_clamped", "x -> a x + b, must map [0, 1] into itself; interval"),
    ("doubling", "x -> 2x mod 1; circle"),
    ("rotation", "x -> x + alpha mod 1; circle"),
    ("tent", "x -> 1 - |2x - 1|; interval"),
    ("permutation_table", "bijection of point indices; finite_explicit"),
    ("index_table", "any function of point indices; finite_explicit"),
    ("shift", "drop the first symbol; symbolic_depth"),
    ("symbol_substitution_table", "symbol-wise relabelling; symbolic_depth"),
    ("composition", "maps applied left to right"),
];

const SPACES: &[(&str, &str)] = &[
    ("interval_grid", "resolution N: {k/(N-1)}, |x - y|"),
    ("circle_grid", "resolution N: {k/N}, wraparound distance"),
    ("symbolic_depth", "depth D, alphabet_size m: all m^D words, 2^-(first difference)"),
    ("finite_explicit", "distance_matrix: one point per row"),
];

const POTENTIALS: &[(&str, &str)] = &[
    ("constant", "value"),
    ("coordinate_affine", "slope x + intercept"),
    ("piecewise_linear", "knots [[x, y], ...] with increasing x"),
    ("first_symbol_table", "values indexed by the first symbol"),
    ("explicit_table", "values indexed by point"),
    ("combination", "offset + sum of weighted potentials"),
    ("abs", "|inner|"),
    ("pullback", "inner evaluated after a projection"),
];

const PROJECTIONS: &[(&str, &str)] = &[
    ("identity", "between copies of the same space"),
    ("index_table", "explicit source index -> explicit target index"),
    ("binary_expansion", "binary symbols -> sum s_k 2^-(k+1) on the circle or interval"),
    ("coordinate_projection", "symbol-wise map between symbolic spaces"),
];

const CHECKS: &[(&str, &str)] = &[
    ("basic", "eight finite-n properties of the partition sums"),
    ("power", "power-system spanning inequality, proxy and constant-potential equality"),
    ("truncation", "truncated-system counting inequality and proxy"),
    ("equicontinuity", "empirical modulus table delta(eps)"),
    ("factor_lower", "target pressure <= source pressure of the pullback"),
    ("factor_upper", "source pressure <= target pressure + fiber sup-entropy"),
    ("conjugacy", "lower inequality in both directions across an invertible projection"),
];

pub const KINDS: &[&str] = &["maps", "spaces", "potentials", "projections", "checks", "examples"];

pub fn example(name: &str) -> Option<&'static str> {
    EXAMPLES.iter().find(|e| e.0 == name).map(|e| e.1)
}

fn table(rows: &[(&str, &str)]) -> String {
    let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
    rows.iter().map(|(n, d)| format!("{n:<width$}  {d}\n")).collect()
}

pub fn list(kind: &str) -> Result<String, LabError> {
    Ok(match kind {
        "maps" => table(MAPS),
        "spaces" => table(SPACES),
        "potentials" => table(POTENTIALS),
        "projections" => table(PROJECTIONS),
        "checks" => table(CHECKS),
        "examples" => {
            let rows: Vec<(&str, String)> = EXAMPLES
                .iter()
                .map(|(n, text)| {
                    let mode = crate::config::parse(text).map(|c| c.mode.as_str()).unwrap_or("invalid");
                    (*n, mode.to_string())
                })
                .collect();
            let width = rows.iter().map(|r| r.0.len()).max().unwrap_or(0);
            rows.iter().map(|(n, m)| format!("{n:<width$}  {m}\n")).collect()
        }
        _ => {
            return Err(LabError::Config(format!("unknown kind `{kind}`; valid kinds: {}", KINDS.join(", "))));
        }
    })
}
