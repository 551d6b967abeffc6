//! Lexicographic enumeration of fixed-size index combinations.

/// Visits every `size`-subset of `0..m` in lexicographic order until `visit`
/// returns true; reports whether any visit did.
pub(crate) fn any_combination(
    m: usize,
    size: usize,
    mut visit: impl FnMut(&[usize]) -> bool,
) -> bool {
    if size > m {
        return false;
    }
    let mut idx: Vec<usize> = (0..size).collect();
    loop {
        if visit(&idx) {
            return true;
        }
        // Rightmost index that can still advance.
        let mut i = size;
        while i > 0 && idx[i - 1] == m - size + i - 1 {
            i -= 1;
        }
        if i == 0 {
            return false;
        }
        idx[i - 1] += 1;
        for j in i..size {
            idx[j] = idx[j - 1] + 1;
        }
    }
}
