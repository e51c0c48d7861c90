//! Antenna grouping schemes.
//!
//! A [`GroupScheme`] maps physical antennas (grid or index order) to groups.
//! The estimators work in group-contiguous order; [`GroupScheme::order`]
//! lists the physical antenna at each contiguous position.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::model::{AntennaPartition, GeometryConfig};
use crate::{CalError, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SchemeLabel {
    #[serde(rename = "FC_I")]
    FcI,
    #[serde(rename = "FC_II")]
    FcII,
    #[serde(rename = "SINGLETON")]
    Singleton,
    #[serde(rename = "ARGOS")]
    Argos,
    #[serde(rename = "AVALANCHE")]
    Avalanche,
    #[serde(rename = "INTERLEAVED")]
    Interleaved,
    #[serde(rename = "NON_INTERLEAVED")]
    NonInterleaved,
    #[serde(rename = "CUSTOM")]
    Custom,
}

impl SchemeLabel {
    pub const ALL: [SchemeLabel; 8] = [
        SchemeLabel::FcI,
        SchemeLabel::FcII,
        SchemeLabel::Singleton,
        SchemeLabel::Argos,
        SchemeLabel::Avalanche,
        SchemeLabel::Interleaved,
        SchemeLabel::NonInterleaved,
        SchemeLabel::Custom,
    ];

    pub fn name(self) -> &'static str {
        match self {
            SchemeLabel::FcI => "FC_I",
            SchemeLabel::FcII => "FC_II",
            SchemeLabel::Singleton => "SINGLETON",
            SchemeLabel::Argos => "ARGOS",
            SchemeLabel::Avalanche => "AVALANCHE",
            SchemeLabel::Interleaved => "INTERLEAVED",
            SchemeLabel::NonInterleaved => "NON_INTERLEAVED",
            SchemeLabel::Custom => "CUSTOM",
        }
    }

    pub fn describe(self) -> &'static str {
        match self {
            SchemeLabel::FcI => "group sizes 1,1,2,3,... trimmed to m (one pilot per group)",
            SchemeLabel::FcII => "g groups of near-equal size (one pilot per group)",
            SchemeLabel::Singleton => "every antenna is its own group",
            SchemeLabel::Argos => "reference antenna plus the rest, identity pilots",
            SchemeLabel::Avalanche => "FC-I sizes, solved recursively",
            SchemeLabel::Interleaved => "equal groups spread over the grid in tiles",
            SchemeLabel::NonInterleaved => "equal groups of column-contiguous antennas",
            SchemeLabel::Custom => "explicit per-antenna assignment",
        }
    }
}

impl fmt::Display for SchemeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for SchemeLabel {
    type Err = CalError;

    fn from_str(s: &str) -> Result<Self> {
        let norm = s.trim().to_ascii_uppercase().replace('-', "_");
        SchemeLabel::ALL
            .into_iter()
            .find(|l| l.name() == norm)
            .ok_or_else(|| CalError::invalid(format!("unknown scheme label {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GroupScheme {
    pub partition: AntennaPartition,
    /// Group of each physical antenna.
    pub assignment: Vec<usize>,
    pub label: SchemeLabel,
}

/// On-disk form of a scheme.
#[derive(Debug, Serialize, Deserialize)]
struct SchemeText {
    label: SchemeLabel,
    assignment: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pilot_lengths: Option<Vec<usize>>,
}

impl GroupScheme {
    /// Build from an explicit assignment; pilot lengths default to one per
    /// group.
    pub fn from_assignment(
        label: SchemeLabel,
        assignment: Vec<usize>,
        pilot_lengths: Option<Vec<usize>>,
    ) -> Result<Self> {
        let g = assignment.iter().max().map_or(0, |&x| x + 1);
        let mut sizes = vec![0; g];
        for &a in &assignment {
            sizes[a] += 1;
        }
        if let Some(empty) = sizes.iter().position(|&s| s == 0) {
            return Err(CalError::invalid(format!("group {empty} has no antennas")));
        }
        let pilots = pilot_lengths.unwrap_or_else(|| vec![1; g]);
        Ok(GroupScheme { partition: AntennaPartition::new(sizes, pilots)?, assignment, label })
    }

    fn contiguous(label: SchemeLabel, sizes: Vec<usize>, pilots: Vec<usize>) -> Result<Self> {
        let assignment = sizes.iter().enumerate().flat_map(|(g, &s)| std::iter::repeat_n(g, s)).collect();
        Ok(GroupScheme { partition: AntennaPartition::new(sizes, pilots)?, assignment, label })
    }

    pub fn m(&self) -> usize {
        self.assignment.len()
    }

    /// Physical antenna at each group-contiguous position (stable within a
    /// group).
    pub fn order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.m()).collect();
        idx.sort_by_key(|&a| (self.assignment[a], a));
        idx
    }

    pub fn to_text(&self) -> String {
        let pilots = self.partition.pilot_lengths();
        let text = SchemeText {
            label: self.label,
            assignment: self.assignment.clone(),
            pilot_lengths: pilots.iter().any(|&l| l != 1).then(|| pilots.to_vec()),
        };
        toml::to_string(&text).expect("scheme serialises")
    }

    pub fn from_text(s: &str) -> Result<Self> {
        let t: SchemeText = toml::from_str(s).map_err(|e| CalError::invalid(format!("bad scheme text: {e}")))?;
        Self::from_assignment(t.label, t.assignment, t.pilot_lengths)
    }
}

/// Pair count `Σ_{i<j} L_i L_j` of a pilot-length composition.
pub fn pair_count(lengths: &[usize]) -> usize {
    let total: usize = lengths.iter().sum();
    let squares: usize = lengths.iter().map(|l| l * l).sum();
    (total * total - squares) / 2
}

/// For `k` channel uses the best split is `k` groups of one pilot each.
pub fn optimal_group_sizes(k: usize) -> Result<Vec<usize>> {
    if k < 2 {
        return Err(CalError::invalid(format!("need at least 2 channel uses, got {k}")));
    }
    Ok(vec![1; k])
}

/// Antennas calibratable with `k` channel uses per slot over `t` slots:
/// `t·k(k−1)/2 + 1`.
pub fn max_calibratable(k: usize, t: usize) -> usize {
    t * k * k.saturating_sub(1) / 2 + 1
}

/// `1, 1, 2, 3, …` (group `i` may hold `i` antennas, 0-based), trimmed
/// from the end or padded on the last group to sum to `m`.
fn avalanche_sizes(m: usize, g: usize) -> Vec<usize> {
    let mut sizes: Vec<usize> = (0..g).map(|i| i.max(1)).collect();
    let mut total: usize = sizes.iter().sum();
    if total < m {
        sizes[g - 1] += m - total;
        return sizes;
    }
    for s in sizes.iter_mut().rev() {
        if total == m {
            break;
        }
        let cut = (*s - 1).min(total - m);
        *s -= cut;
        total -= cut;
    }
    sizes
}

fn equal_sizes(m: usize, g: usize) -> Vec<usize> {
    let (q, r) = (m / g, m % g);
    (0..g).map(|i| if i < g - r { q } else { q + 1 }).collect()
}

fn grid(label: SchemeLabel, m: usize, g: usize, geometry: Option<&GeometryConfig>) -> Result<&GeometryConfig> {
    let geo = geometry.ok_or_else(|| CalError::invalid(format!("{label} needs a grid geometry")))?;
    geo.validate(m)?;
    if !m.is_multiple_of(g) {
        return Err(CalError::invalid(format!("{label} needs g to divide m ({m} / {g})")));
    }
    Ok(geo)
}

pub fn make_scheme(label: SchemeLabel, m: usize, g: usize, geometry: Option<&GeometryConfig>) -> Result<GroupScheme> {
    if m < 2 || g < 2 {
        return Err(CalError::invalid(format!("need m ≥ 2 and g ≥ 2, got m={m} g={g}")));
    }
    if g > m {
        return Err(CalError::invalid(format!("{g} groups cannot hold {m} antennas")));
    }
    match label {
        SchemeLabel::FcI | SchemeLabel::Avalanche => GroupScheme::contiguous(label, avalanche_sizes(m, g), vec![1; g]),
        SchemeLabel::FcII => GroupScheme::contiguous(label, equal_sizes(m, g), vec![1; g]),
        SchemeLabel::Singleton => {
            if g != m {
                return Err(CalError::invalid(format!("SINGLETON needs g = m, got m={m} g={g}")));
            }
            GroupScheme::contiguous(label, vec![1; m], vec![1; m])
        }
        SchemeLabel::Argos => {
            if g != 2 {
                return Err(CalError::invalid(format!("ARGOS uses 2 groups, got g={g}")));
            }
            GroupScheme::contiguous(label, vec![1, m - 1], vec![1, m - 1])
        }
        SchemeLabel::NonInterleaved => {
            let geo = grid(label, m, g, geometry)?;
            let size = m / g;
            // walk the grid column by column and cut into equal chunks
            let mut assignment = vec![0; m];
            for (k, a) in (0..geo.cols).flat_map(|c| (0..geo.rows).map(move |r| r * geo.cols + c)).enumerate() {
                assignment[a] = k / size;
            }
            GroupScheme::from_assignment(label, assignment, None)
        }
        SchemeLabel::Interleaved => {
            let geo = grid(label, m, g, geometry)?;
            // tiles `rows x w` numbered row-major; equal numbers form a group
            if !g.is_multiple_of(geo.rows) || geo.cols % (g / geo.rows) != 0 {
                return Err(CalError::invalid(format!(
                    "INTERLEAVED needs g to tile the {}x{} grid, got g={g}",
                    geo.rows, geo.cols
                )));
            }
            let w = g / geo.rows;
            let assignment = (0..m)
                .map(|a| {
                    let (r, c) = geo.position(a);
                    r * w + c % w
                })
                .collect();
            GroupScheme::from_assignment(label, assignment, None)
        }
        SchemeLabel::Custom => Err(CalError::invalid("CUSTOM schemes come from an explicit assignment")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stacking::check_identifiability;

    fn compositions(k: usize) -> Vec<Vec<usize>> {
        if k == 0 {
            return vec![vec![]];
        }
        let mut out = Vec::new();
        for first in 1..=k {
            for mut rest in compositions(k - first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
        out
    }

    #[test]
    fn table_sizes() {
        let s = |l, m| make_scheme(l, m, 12, None).unwrap().partition.group_sizes().to_vec();
        assert_eq!(s(SchemeLabel::FcI, 64), vec![1, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 8]);
        assert_eq!(s(SchemeLabel::FcI, 67), vec![1, 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11]);
        assert_eq!(s(SchemeLabel::FcII, 64), vec![5, 5, 5, 5, 5, 5, 5, 5, 6, 6, 6, 6]);
        assert_eq!(s(SchemeLabel::FcII, 67), vec![5, 5, 5, 5, 5, 6, 6, 6, 6, 6, 6, 6]);
        let av = make_scheme(SchemeLabel::Avalanche, 7, 4, None).unwrap();
        assert_eq!(av.partition.group_sizes(), &[1, 1, 2, 3]);
    }

    #[test]
    fn optimal_grouping() {
        assert_eq!(optimal_group_sizes(12).unwrap(), vec![1; 12]);
        assert_eq!(max_calibratable(12, 1), 67);
        assert_eq!(optimal_group_sizes(2).unwrap(), vec![1, 1]);
        assert_eq!(max_calibratable(2, 1), 2);
        assert_eq!(max_calibratable(2, 2), 3);
        assert_eq!(max_calibratable(4, 3), 19);
        assert!(optimal_group_sizes(1).is_err());
    }

    #[test]
    fn all_ones_maximises_pair_count() {
        for k in 2..=7 {
            let best = pair_count(&optimal_group_sizes(k).unwrap());
            assert_eq!(best, k * (k - 1) / 2);
            for c in compositions(k) {
                assert!(pair_count(&c) <= best, "{c:?}");
            }
        }
    }

    #[test]
    fn shipped_schemes_are_identifiable() {
        let geo = GeometryConfig { rows: 4, cols: 16, spacing_over_wavelength: 0.5 };
        let cases = [
            (SchemeLabel::FcI, 64, 12),
            (SchemeLabel::FcI, 67, 12),
            (SchemeLabel::FcII, 64, 12),
            (SchemeLabel::FcII, 67, 12),
            (SchemeLabel::Avalanche, 64, 12),
            (SchemeLabel::Singleton, 16, 16),
            (SchemeLabel::Argos, 16, 2),
            (SchemeLabel::Interleaved, 64, 16),
            (SchemeLabel::NonInterleaved, 64, 16),
        ];
        for (l, m, g) in cases {
            let s = make_scheme(l, m, g, Some(&geo)).unwrap();
            assert_eq!(s.partition.m(), m);
            assert!(check_identifiability(&s.partition, None).ok, "{l} {m} {g}");
        }
    }

    #[test]
    fn interleaving_changes_assignment_only() {
        let geo = GeometryConfig { rows: 4, cols: 16, spacing_over_wavelength: 0.5 };
        let a = make_scheme(SchemeLabel::Interleaved, 64, 16, Some(&geo)).unwrap();
        let b = make_scheme(SchemeLabel::NonInterleaved, 64, 16, Some(&geo)).unwrap();
        assert_eq!(a.partition, b.partition);
        assert_ne!(a.assignment, b.assignment);
        // a column is one non-interleaved group
        for r in 0..4 {
            assert_eq!(b.assignment[r * 16 + 5], 5);
        }
        // interleaved groups never share a column
        for g in 0..16 {
            let cols: std::collections::BTreeSet<usize> =
                (0..64).filter(|&x| a.assignment[x] == g).map(|x| x % 16).collect();
            assert_eq!(cols.len(), 4);
        }
        assert!(make_scheme(SchemeLabel::Interleaved, 64, 16, None).is_err());
    }

    #[test]
    fn order_is_group_contiguous() {
        let s = GroupScheme::from_assignment(SchemeLabel::Custom, vec![1, 0, 1, 2, 0], None).unwrap();
        assert_eq!(s.order(), vec![1, 4, 0, 2, 3]);
        assert_eq!(s.partition.group_sizes(), &[2, 2, 1]);
    }

    #[test]
    fn text_round_trip() {
        let geo = GeometryConfig { rows: 4, cols: 16, spacing_over_wavelength: 0.5 };
        for s in [
            make_scheme(SchemeLabel::Interleaved, 64, 16, Some(&geo)).unwrap(),
            make_scheme(SchemeLabel::Argos, 5, 2, None).unwrap(),
        ] {
            let back = GroupScheme::from_text(&s.to_text()).unwrap();
            assert_eq!(back, s);
        }
        assert!(GroupScheme::from_text("label = \"NOPE\"\nassignment = [0, 1]").is_err());
        assert!(GroupScheme::from_text("label = \"CUSTOM\"\nassignment = [0, 2]").is_err());
    }

    #[test]
    fn labels_parse() {
        for l in SchemeLabel::ALL {
            assert_eq!(l.name().parse::<SchemeLabel>().unwrap(), l);
        }
        assert_eq!("fc-ii".parse::<SchemeLabel>().unwrap(), SchemeLabel::FcII);
        assert!("x".parse::<SchemeLabel>().is_err());
    }

    #[test]
    fn unsupported_combinations_rejected() {
        assert!(make_scheme(SchemeLabel::Singleton, 8, 4, None).is_err());
        assert!(make_scheme(SchemeLabel::Argos, 8, 3, None).is_err());
        assert!(make_scheme(SchemeLabel::FcII, 4, 5, None).is_err());
        assert!(make_scheme(SchemeLabel::Custom, 4, 2, None).is_err());
    }
}
