use super::{Family, Mode};

/// Row counts per constraint family.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct FamilyCounts {
    counts: [usize; 12],
}

impl FamilyCounts {
    /// Rows the assembler emits for an instance of the given shape.
    pub fn expected(
        nodes: usize,
        levels: usize,
        stations: usize,
        servers: usize,
        origins: usize,
        mode: Mode,
    ) -> Self {
        let v = nodes * levels;
        let mut c = FamilyCounts::default();
        c.add(Family::Eq2, v);
        c.add(Family::Eq3, v);
        c.add(Family::Eq4, v * servers.saturating_sub(1));
        if mode == Mode::NonMyopic {
            c.add(Family::Eq5, v);
        }
        c.add(Family::Eq6, 1);
        c.add(Family::Eq7, v * v);
        c.add(Family::Eq8, v - origins);
        c.add(Family::Eq9, v - origins);
        c.add(Family::Eq10, v);
        c.add(Family::Eq11, stations * levels.saturating_sub(1));
        c.add(Family::Eq12, stations);
        c.add(Family::ChargeCap, nodes * levels.saturating_sub(1));
        c
    }

    pub fn add(&mut self, family: Family, count: usize) {
        self.counts[family as usize] += count;
    }

    pub fn get(&self, family: Family) -> usize {
        self.counts[family as usize]
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Family, usize)> + '_ {
        Family::ALL.into_iter().map(|f| (f, self.get(f)))
    }
}

/// Columns of the program: all X pairs, Y slots, one W per arc and one P per
/// charging path.
pub fn count_variables(
    nodes: usize,
    levels: usize,
    arc_count: usize,
    stations: usize,
    servers: usize,
) -> usize {
    let v = nodes * levels;
    v * v + v * servers + arc_count + stations * levels * levels.saturating_sub(1) / 2
}

/// Rows of the myopic program.
pub fn count_constraints(
    nodes: usize,
    levels: usize,
    stations: usize,
    servers: usize,
    origins: usize,
) -> usize {
    FamilyCounts::expected(nodes, levels, stations, servers, origins, Mode::Myopic).total()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn line_arcs(n: usize) -> usize {
        8 * n - 8 + 12
    }

    #[test]
    fn generator_family_totals() {
        let rows = [
            (10, 1_828, 1_907),
            (50, 41_028, 41_547),
            (100, 162_028, 163_097),
            (200, 644_028, 646_197),
            (400, 2_568_028, 2_572_397),
            (800, 10_256_028, 10_264_797),
            (1000, 16_020_028, 16_030_997),
        ];
        for (n, vars, cons) in rows {
            assert_eq!(count_variables(n, 4, line_arcs(n), 4, 3), vars, "N={n}");
            assert_eq!(count_constraints(n, 4, 4, 3, 10), cons, "N={n}");
        }
    }

    #[test]
    fn closed_forms() {
        for n in [4usize, 7, 33, 250] {
            assert_eq!(count_variables(n, 4, line_arcs(n), 4, 3), 16 * n * n + 20 * n + 28);
            assert_eq!(count_constraints(n, 4, 4, 3, 10), 16 * n * n + 31 * n - 3);
        }
    }

    #[test]
    fn non_myopic_adds_one_row_per_vertex() {
        let my = FamilyCounts::expected(5, 2, 1, 2, 1, Mode::Myopic);
        let non = FamilyCounts::expected(5, 2, 1, 2, 1, Mode::NonMyopic);
        assert_eq!(non.total() - my.total(), 10);
        assert_eq!(my.get(Family::Eq5), 0);
    }
}
