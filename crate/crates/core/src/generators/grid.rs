use super::pattern::{linearity_violation, Pattern};
use crate::error::{Error, Result};

/// Label of grid cell `x_{i,j}` in an `f × f` grid.
#[inline]
pub fn grid_cell(i: usize, j: usize, f: usize) -> u32 {
    (i * f + j) as u32
}

/// The grid pattern of a linear `F`: rows `1..f` and every column carry a
/// copy of `F` under `x_{i,j} ↦ w_{(i+j) mod f}`; the zeroth row is the roots.
pub fn grid_pattern(f_pat: &Pattern) -> Result<Pattern> {
    if let Some((a, b)) = linearity_violation(f_pat.graph()) {
        return Err(Error::NotLinear(a, b));
    }
    grid_pattern_unchecked(f_pat)
}

/// Same construction without the linearity requirement.
pub fn grid_pattern_unchecked(f_pat: &Pattern) -> Result<Pattern> {
    let f = f_pat.f();
    let mut edges: Vec<Vec<u32>> = Vec::with_capacity((2 * f - 1) * f_pat.edge_count());
    for i in 1..f {
        for e in f_pat.edges() {
            edges.push(
                e.iter()
                    .map(|&l| grid_cell(i, (l as usize + f - i) % f, f))
                    .collect(),
            );
        }
    }
    for j in 0..f {
        for e in f_pat.edges() {
            edges.push(
                e.iter()
                    .map(|&l| grid_cell((l as usize + f - j) % f, j, f))
                    .collect(),
            );
        }
    }
    let expected = edges.len();
    let name = format!("grid({})", f_pat.name().unwrap_or("F"));
    let grid = Pattern::new(f * f, f_pat.k(), edges)?.named(name);
    // a row image lies in one row and a column image in one column, so none coincide
    assert_eq!(grid.edge_count(), expected, "grid images collided");
    grid.with_roots((0..f).map(|j| grid_cell(0, j, f)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators::pattern_library;

    fn image_is_copy(g: &Pattern, f_pat: &Pattern, map: impl Fn(u32) -> u32) -> bool {
        f_pat.edges().all(|e| {
            g.graph()
                .contains_edge(&e.iter().map(|&l| map(l)).collect::<Vec<_>>())
        })
    }

    #[test]
    fn single_edge_grid() {
        let e = pattern_library("edge").unwrap();
        let g = grid_pattern(&e).unwrap();
        assert_eq!((g.f(), g.edge_count()), (9, 5));
        assert_eq!(g.roots(), &[0, 1, 2]);
        // rows 1, 2 by hand: x_{i,j} with (i+j) mod 3 = l
        let rows: Vec<Vec<u32>> = (1..3)
            .map(|i| (0..3).map(|j| grid_cell(i, j, 3)).collect())
            .collect();
        for r in rows {
            assert!(g.graph().contains_edge(&r));
        }
        for j in 0..3 {
            assert!(g.graph().contains_edge(&[
                grid_cell(0, j, 3),
                grid_cell(1, j, 3),
                grid_cell(2, j, 3)
            ]));
        }
    }

    #[test]
    fn cherry_grid_rows_and_columns() {
        let c = pattern_library("cherry").unwrap();
        assert!(matches!(grid_pattern(&c), Err(Error::NotLinear(..))));
        let g = grid_pattern_unchecked(&c).unwrap();
        assert_eq!((g.f(), g.edge_count()), (16, 14));
        for i in 1..4 {
            assert!(image_is_copy(&g, &c, |l| grid_cell(
                i,
                (l as usize + 4 - i) % 4,
                4
            )));
        }
        for j in 0..4 {
            assert!(image_is_copy(&g, &c, |l| grid_cell(
                (l as usize + 4 - j) % 4,
                j,
                4
            )));
        }
    }
}
