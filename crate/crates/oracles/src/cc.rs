//! Face-connected components by union–find over a dense lattice.

pub struct Lattice {
    pub dims: [usize; 3],
}

impl Lattice {
    pub fn index(&self, c: [usize; 3]) -> usize {
        c[0] + self.dims[0] * (c[1] + self.dims[1] * c[2])
    }

    pub fn coords(&self, i: usize) -> [usize; 3] {
        [i % self.dims[0], (i / self.dims[0]) % self.dims[1], i / (self.dims[0] * self.dims[1])]
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

/// Components of the member set, each sorted, ordered by smallest member.
pub fn components(lattice: &Lattice, members: &[usize]) -> Vec<Vec<usize>> {
    let mut is_member = vec![false; lattice.len()];
    for &m in members {
        is_member[m] = true;
    }
    let mut parent: Vec<usize> = (0..lattice.len()).collect();
    for &m in members {
        let c = lattice.coords(m);
        for axis in 0..3 {
            if c[axis] + 1 < lattice.dims[axis] {
                let mut n = c;
                n[axis] += 1;
                let ni = lattice.index(n);
                if is_member[ni] {
                    let (a, b) = (find(&mut parent, m), find(&mut parent, ni));
                    if a != b {
                        parent[a.max(b)] = a.min(b);
                    }
                }
            }
        }
    }
    let mut groups = std::collections::BTreeMap::<usize, Vec<usize>>::new();
    let mut sorted = members.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    for m in sorted {
        let r = find(&mut parent, m);
        groups.entry(r).or_default().push(m);
    }
    let mut out: Vec<Vec<usize>> = groups.into_values().collect();
    out.sort_by_key(|g| g[0]);
    out
}
