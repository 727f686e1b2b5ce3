//! Textbook quadratic DBSCAN.

/// Labels from the classic index-order DBSCAN: clusters numbered in order of their
/// lowest-index core point, border points joining the lowest-numbered neighbouring cluster,
/// noise `-1`. Neighbourhoods include the point itself (`dist ≤ eps`).
pub fn dbscan(points: &[[f64; 2]], eps: f64, min_pts: usize) -> Vec<i64> {
    let n = points.len();
    let near = |i: usize, j: usize| {
        let dx = points[i][0] - points[j][0];
        let dy = points[i][1] - points[j][1];
        dx * dx + dy * dy <= eps * eps
    };
    let core: Vec<bool> = (0..n).map(|i| (0..n).filter(|&j| near(i, j)).count() >= min_pts).collect();
    let mut label = vec![-1i64; n];
    let mut next = 0i64;
    for start in 0..n {
        if !core[start] || label[start] >= 0 {
            continue;
        }
        // flood the core points reachable from `start`
        let mut stack = vec![start];
        label[start] = next;
        while let Some(i) = stack.pop() {
            for j in 0..n {
                if core[j] && label[j] < 0 && near(i, j) {
                    label[j] = next;
                    stack.push(j);
                }
            }
        }
        next += 1;
    }
    for i in 0..n {
        if core[i] {
            continue;
        }
        label[i] = (0..n).filter(|&j| core[j] && near(i, j)).map(|j| label[j]).min().unwrap_or(-1);
    }
    label
}
