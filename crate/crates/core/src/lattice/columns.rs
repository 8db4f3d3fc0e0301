use super::{Labelling, LabellingKind, PointCloud};
use crate::models::JointSpectrum;

/// Where the second quantum number is counted from inside each J-block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnOrigin {
    /// l = position from the bottom of the block (0, 1, 2, ...).
    Bottom,
    /// l = minus the position from the top of the block (..., -2, -1, 0).
    Top,
}

/// Labels every joint eigenvalue by (block, position in block).
///
/// Counting from the bottom is the half-lattice labelling of the lower
/// boundary extended column by column. `Top` needs the top of every block to
/// lie inside the spectrum's window.
pub fn label_columns(spectrum: &JointSpectrum, origin: ColumnOrigin) -> (PointCloud, Labelling) {
    let cloud = PointCloud::new(spectrum.k, spectrum.xy());
    let mut lab = Labelling::new(LabellingKind::HalfLattice);
    let mut start = 0;
    while start < spectrum.points.len() {
        let block = spectrum.points[start].block_id;
        let mut end = start;
        while end < spectrum.points.len() && spectrum.points[end].block_id == block {
            end += 1;
        }
        let top = spectrum.points[end - 1].index_in_block as i64;
        for i in start..end {
            let idx = spectrum.points[i].index_in_block as i64;
            let l = match origin {
                ColumnOrigin::Bottom => idx,
                ColumnOrigin::Top => idx - top,
            };
            lab.assignment.insert(i, (block, l));
        }
        start = end;
    }
    (cloud, lab)
}
