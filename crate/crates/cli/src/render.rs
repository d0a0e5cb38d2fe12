//! Output formatting: floats with 17 significant digits (bit-exact round
//! trips), JSON assembled by hand so key order and number format stay fixed,
//! and the indented pool-tree rendering.

use pooltest::NestedStrategy;

/// 17 significant digits: enough to reproduce the exact f64 on re-parse.
pub fn float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn float_array(xs: &[f64]) -> String {
    let items: Vec<String> = xs.iter().map(|&x| float(x)).collect();
    format!("[{}]", items.join(","))
}

pub fn int_array(xs: &[i64]) -> String {
    let items: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
    format!("[{}]", items.join(","))
}

pub fn json_string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            '\r' => out.push_str("\\r"),
            c if (c as u32) < 0x20 => out.push_str(&format!("\\u{:04x}", c as u32)),
            c => out.push(c),
        }
    }
    out.push('"');
    out
}

const MAX_TREE_NODES: usize = 64;

/// Indented listing of the pool hierarchy: `(1)`, `(1,i2)`, ... with sizes,
/// capped at 64 printed nodes with an elision marker.
pub fn tree(s: &NestedStrategy) -> String {
    if s.stages() == 0 {
        return "individual testing (no pools)".to_string();
    }
    let pools = s.pools();
    let mut lines = Vec::new();
    let mut printed = 0usize;
    let mut elided = false;
    let mut path = vec![1usize];

    fn descend(
        pools: &[i64],
        depth: usize,
        path: &mut Vec<usize>,
        lines: &mut Vec<String>,
        printed: &mut usize,
        elided: &mut bool,
    ) {
        if *elided {
            return;
        }
        if *printed == MAX_TREE_NODES {
            lines.push("...".to_string());
            *elided = true;
            return;
        }
        let label: Vec<String> = path.iter().map(|i| i.to_string()).collect();
        lines.push(format!(
            "{}({}) size {}",
            "  ".repeat(depth),
            label.join(","),
            pools[depth]
        ));
        *printed += 1;
        if depth + 1 < pools.len() {
            let children = (pools[depth] / pools[depth + 1]) as usize;
            for c in 1..=children {
                path.push(c);
                descend(pools, depth + 1, path, lines, printed, elided);
                path.pop();
            }
        }
    }

    descend(pools, 0, &mut path, &mut lines, &mut printed, &mut elided);
    lines.join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_round_trips() {
        for x in [0.02, 1.0 / 3.0, 0.197977168940359, 1e-300] {
            assert_eq!(float(x).parse::<f64>().unwrap(), x);
        }
    }

    #[test]
    fn tree_counts_nodes_and_elides() {
        let s = NestedStrategy::new(vec![27, 9, 3]).unwrap();
        let t = tree(&s);
        assert_eq!(t.lines().count(), 1 + 3 + 9); // all 13 nodes fit
        assert!(t.starts_with("(1) size 27"));
        assert!(t.contains("\n  (1,1) size 9"));
        assert!(t.contains("\n    (1,1,1) size 3"));

        let s = NestedStrategy::new(vec![243, 81, 27, 9, 3]).unwrap();
        let t = tree(&s);
        assert_eq!(t.lines().count(), MAX_TREE_NODES + 1);
        assert_eq!(t.lines().last().unwrap(), "...");
    }

    #[test]
    fn json_escaping() {
        assert_eq!(json_string("a\nb\"c"), "\"a\\nb\\\"c\"");
    }
}
