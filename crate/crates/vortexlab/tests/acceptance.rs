//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if any criterion fails.

mod common;

use std::collections::BTreeSet;
use std::f64::consts::PI;
use std::time::Instant;

use common::{build_bundle, parse_mesh, Server};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vortex_core::clustering::{cluster_profiles, dbscan, embed_2d, ClusterRequest, ClusterScope, Preset, TsneParams};
use vortex_core::fields::{compute_criteria, AxisRoles, GridMeta, VelocityField};
use vortex_core::geometry::{geometric_features, skeletonize, Skeleton, SkeletonNode, SkeletonParams};
use vortex_core::hairpin::{score_vortex, HairpinParams};
use vortex_core::linalg::{self, Vec3};
use vortex_core::regions::{build_tree, extract_all_regions, CellGrid, SplitParams, VortexRegion, VortexTree};
use vortex_core::synthetic::{rigid_rotation, simple_shear};
use vortex_core::thresholding::{
    expand_histogram, fibonacci_indices, refine_histogram, ExpandParams, RefineParams, StopCondition,
};
use vortex_core::Execution;
use vortex_oracles::{clustering as dbscan_oracle, equations as eq, fixtures, partition, tree as tree_oracle};
use vortexlab::pipeline::{run_all, ClusterSettings, PipelineParams};
use vortexlab::scenarios::{scenario_field, scenario_tubes, Scenario};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn analytic_criteria() -> Outcome {
    let meta = GridMeta::new([33; 3], [1.0 / 16.0; 3], [-1.0; 3], AxisRoles::default()).map_err(|e| e.to_string())?;
    let vel = VelocityField::from_fn(&meta, rigid_rotation(1.0), Execution::Parallel);
    let t = Instant::now();
    let f = compute_criteria(&meta, &vel, Execution::Parallel).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed().as_secs_f64();
    let mut worst: f64 = 0.0;
    let mut worst_div: f64 = 0.0;
    let mut interior = 0;
    for k in 1..32 {
        for j in 1..32 {
            for i in 1..32 {
                let v = meta.index([i, j, k]);
                let xi = linalg::norm(f.vorticity[v]);
                for (got, want) in [(f.q[v], 1.0), (f.lambda2[v], -1.0), (f.lambda_ci[v], 1.0), (xi, 2.0)] {
                    worst = worst.max((got - want).abs());
                }
                worst_div = worst_div.max(f.divergence[v].abs());
                interior += 1;
            }
        }
    }
    check(worst <= 1e-6, || format!("rigid rotation off by {worst:e}"))?;
    check(worst_div < 1e-9, || format!("|div| reaches {worst_div:e}"))?;
    check(elapsed < 1.0, || format!("criteria took {elapsed:.3} s"))?;

    let shear = VelocityField::from_fn(&meta, simple_shear(1.0), Execution::Parallel);
    let g = compute_criteria(&meta, &shear, Execution::Parallel).map_err(|e| e.to_string())?;
    let shear_worst = g.q.iter().chain(&g.lambda2).fold(0.0f64, |m, x| m.max(x.abs()));
    check(shear_worst <= 1e-9, || format!("shear Q/λ₂ reach {shear_worst:e}"))?;
    Ok(format!(
        "{interior} interior vertices, max error {worst:.1e}, max |div| {worst_div:.1e}, shear max |Q|,|λ₂| {shear_worst:.1e}, {:.0} ms",
        elapsed * 1e3
    ))
}

fn path_skeleton(points: &[Vec3], omega: &[f64]) -> Skeleton {
    Skeleton {
        nodes: points.iter().zip(omega).map(|(&position, &omega_y_prime)| SkeletonNode { position, omega_y_prime }).collect(),
        edges: (1..points.len()).map(|i| [i - 1, i]).collect(),
        main_path: (0..points.len()).collect(),
        degenerate: false,
    }
}

fn rel_err(got: f64, want: f64) -> f64 {
    let scale = got.abs().max(want.abs());
    if scale == 0.0 {
        0.0
    } else {
        (got - want).abs() / scale
    }
}

fn equation_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let params = HairpinParams::default();
    let (mut e1, mut e2, mut e3) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let height = rng.random_range(5.0..40.0);
        let meta = GridMeta::new([65, 65, 33], [1.0, 1.0, height / 32.0], [0.0, 0.0, -1.0], AxisRoles::default()).unwrap();
        let (z0, z1) = meta.vertical_bounds();
        let n = rng.random_range(3..60);
        let mut p = [rng.random_range(0.0..64.0), rng.random_range(0.0..64.0), rng.random_range(z0..z1)];
        let pts: Vec<Vec3> = (0..n)
            .map(|_| {
                for v in p.iter_mut() {
                    *v += rng.random_range(-1.5..1.5);
                }
                p
            })
            .collect();
        let omega: Vec<f64> = (0..n).map(|_| rng.random_range(-3.0..3.0)).collect();
        let f = geometric_features(&pts, &meta.axis_roles).map_err(|e| e.to_string())?;
        let s = score_vortex(0, &f, &path_skeleton(&pts, &omega), &meta, &params).map_err(|e| e.to_string())?;

        let z: Vec<f64> = pts.iter().map(|q| q[2]).collect();
        e1 = e1.max(rel_err(s.rms_oy, eq::weighted_rms(&z, &omega, z0, z1)));
        let (c, dirs, len) = eq::polyline(&pts);
        let c_h = eq::hairpin_curvature(c, dirs[0], dirs[1], dirs[2]);
        e2 = e2.max(rel_err(s.c_h, c_h));
        let rho = len / eq::principal_box_diagonal(&pts);
        e3 = e3.max(rel_err(s.c_h_tilde, eq::adjusted(c_h, rho, len, n)));
    }
    let worst = e1.max(e2).max(e3);
    let detail = format!("1000 inputs, max relative error rms {e1:.1e}, C_h {e2:.1e}, C̃_h {e3:.1e}");
    check(worst <= 1e-9, || detail.clone())?;
    Ok(detail)
}

fn tree_structure(tree: &VortexTree) -> Result<(), String> {
    for node in &tree.nodes {
        if node.children.is_empty() {
            continue;
        }
        let mut union: Vec<usize> = node.children.iter().flat_map(|&c| tree.nodes[c].region.cells.clone()).collect();
        union.sort_unstable();
        check(union == node.region.cells, || format!("children of node {} do not partition it", node.id))?;
        for &c in &node.children {
            check(tree.nodes[c].parent == Some(node.id), || format!("node {c} has the wrong parent"))?;
        }
    }
    let mut seen = BTreeSet::new();
    for leaf in tree.leaves() {
        for &c in &leaf.region.cells {
            check(seen.insert(c), || format!("cell {c} is in two leaves"))?;
        }
    }
    Ok(())
}

fn tree_invariants() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let (mut fields, mut split, mut leaves) = (0, 0, 0);
    for case in 0..50 {
        let (dims, values) = fixtures::multi_well(rng.random());
        let g = CellGrid { dims, spacing: [1.0; 3], origin: [0.0; 3], values };
        let seq = Execution::Sequential;
        let init = refine_histogram(&g.values, &RefineParams::default(), seq).map_err(|e| format!("case {case}: {e}"))?;
        let sched = expand_histogram(&g.values, init.value, &ExpandParams::default(), seq).map_err(|e| format!("case {case}: {e}"))?;
        let noise = [0.0, 1e-4, 1e-3][case % 3];
        let params = SplitParams { vsf: [0.0, 0.05, 0.2, 3.5][case % 4], min_comp_frac: [0.0, 5e-4][case % 2] };
        let regions = extract_all_regions(&g, init.value, noise, Execution::Parallel);
        let f = tree_oracle::CellField { dims: g.dims, spacing: g.spacing, values: &g.values };
        let got: BTreeSet<Vec<usize>> = regions.iter().map(|r| r.cells.clone()).collect();
        let want: BTreeSet<Vec<usize>> = tree_oracle::regions(&f, init.value, noise).into_iter().collect();
        check(got == want, || format!("case {case}: regions differ from the brute-force sweep"))?;

        let tree = build_tree(&g, &regions, &sched.steps, &params, Execution::Parallel);
        tree_structure(&tree).map_err(|e| format!("case {case}: {e}"))?;
        for root in tree.roots() {
            let mut ids = vec![root.id];
            ids.extend(tree.descendants(root.id));
            let got: BTreeSet<Vec<usize>> =
                ids.iter().filter(|&&i| tree.nodes[i].is_leaf()).map(|&i| tree.nodes[i].region.cells.clone()).collect();
            let want: BTreeSet<Vec<usize>> =
                tree_oracle::leaves(&f, &root.region.cells, &sched.steps.values, params.vsf, params.min_comp_frac).into_iter().collect();
            check(got == want, || format!("case {case}: leaves of root {} differ from the brute-force sweep", root.id))?;
        }
        let again = build_tree(&g, &regions, &sched.steps, &params, Execution::Sequential);
        let (a, b) = (serde_json::to_vec(&tree).unwrap(), serde_json::to_vec(&again).unwrap());
        check(a == b, || format!("case {case}: two runs differ"))?;
        fields += 1;
        leaves += tree.leaves().count();
        if tree.nodes.len() > regions.len() {
            split += 1;
        }
    }
    Ok(format!("{fields} fields, {split} with splits, {leaves} leaves; all match the sweep, runs byte-identical"))
}

fn histogram_procedures() -> Outcome {
    let seq = Execution::Sequential;
    let uniform = |n: usize, lo: f64, hi: f64, seed: u64| -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n).map(|_| rng.random_range(lo..hi)).collect()
    };
    let run = |v: &[f64]| refine_histogram(v, &RefineParams::default(), seq).map_err(|e| e.to_string());

    let mut a = uniform(20_000, -1.0, 0.0, 1);
    a.extend([-1.0, -1e-9]);
    let ra = run(&a)?;
    check(ra.stop == StopCondition::SmallLastBin, || format!("(a) stopped by {:?}", ra.stop))?;

    let mut b: Vec<f64> = (0..2500).map(|i| -1.0 + 0.98 * i as f64 / 2500.0).collect();
    b.extend((0..3500).map(|i| -0.0195 + 0.009 * i as f64 / 3500.0));
    b.extend((0..4000).map(|i| -0.0095 + 0.0094 * i as f64 / 4000.0));
    b.push(-1e-4);
    let rb = run(&b)?;
    check(rb.stop == StopCondition::SimilarLastBins, || format!("(b) stopped by {:?}", rb.stop))?;

    let mut c = uniform(1000, -1.0, -0.001, 2);
    c.extend([-1.0, -0.001]);
    c.extend(std::iter::repeat_n(-0.002, 1500));
    let rc = run(&c)?;
    check(rc.stop == StopCondition::UnchangedLastBin, || format!("(c) stopped by {:?}", rc.stop))?;

    let fib: [(usize, &[usize]); 3] = [
        (13, &[0, 1, 2, 3, 5, 8, 13]),
        (100, &[0, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89]),
        (200, &[0, 1, 2, 3, 5, 8, 13, 21, 34, 55, 89, 144]),
    ];
    for (n, want) in fib {
        check(fibonacci_indices(n) == want, || format!("Fibonacci set for {n}: {:?}", fibonacci_indices(n)))?;
    }

    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let mut max_iter = 0;
    for _ in 0..500 {
        let n = rng.random_range(50..3000);
        let spread: f64 = rng.random_range(0.0..6.0);
        let spike: f64 = rng.random_range(0.0..0.9);
        let mut v: Vec<f64> = (0..n).map(|_| -(10f64).powf(rng.random_range(-spread..=0.0))).collect();
        let rep = v[0];
        let k = (spike * n as f64) as usize;
        v.extend(std::iter::repeat_n(rep, k));
        if let Ok(r) = refine_histogram(&v, &RefineParams::default(), seq) {
            max_iter = max_iter.max(r.iterations);
        }
    }
    check(max_iter <= 100, || format!("a fuzz input took {max_iter} iterations"))?;
    Ok(format!(
        "stops (a) at {}, (b) at {}, (c) at {} iterations; Fibonacci sets exact; fuzz max {max_iter} iterations",
        ra.iterations, rb.iterations, rc.iterations
    ))
}

fn shape(dims: [usize; 3], inside: impl Fn(Vec3) -> bool) -> (CellGrid, VortexRegion, GridMeta) {
    let meta = GridMeta::new(dims.map(|d| d + 1), [1.0; 3], [0.0; 3], AxisRoles::default()).unwrap();
    let n: usize = dims.iter().product();
    let mut grid = CellGrid { dims, spacing: [1.0; 3], origin: [0.0; 3], values: vec![1.0; n] };
    let mut cells = Vec::new();
    for c in 0..n {
        if inside(grid.center(c)) {
            grid.values[c] = -1.0;
            cells.push(c);
        }
    }
    let region = VortexRegion::from_cells(0, cells, &grid);
    (grid, region, meta)
}

fn skeleton_contract() -> Outcome {
    let (y0, z0, x0, r, len) = (8.0, 8.0, 4.0, 3.0, 40.0);
    let (grid, region, meta) = shape([48, 16, 16], |p| (p[1] - y0).powi(2) + (p[2] - z0).powi(2) <= r * r && p[0] >= x0 && p[0] <= x0 + len);
    let zeros = vec![0.0; meta.vertex_count()];
    let sk = skeletonize(&grid, &region, &meta, &zeros, &SkeletonParams::default()).map_err(|e| e.to_string())?;
    let pts = sk.main_path_points();
    let l: f64 = pts.windows(2).map(|w| linalg::dist(w[0], w[1])).sum();
    let dev = sk.nodes.iter().map(|n| ((n.position[1] - y0).powi(2) + (n.position[2] - z0).powi(2)).sqrt()).fold(0.0, f64::max);
    check((l - len).abs() <= 0.1 * len, || format!("tube main path {l:.2} vs {len}"))?;
    check(dev < 1.5, || format!("axis deviation {dev:.2}"))?;

    let (cy, cz, xs, big) = (24.0, 4.0, 8.0, 16.0);
    let (grid, region, meta) = shape([16, 48, 28], |p| {
        let (dy, dz) = (p[1] - cy, p[2] - cz);
        dz >= 0.0 && ((dy * dy + dz * dz).sqrt() - big).powi(2) + (p[0] - xs).powi(2) <= r * r
    });
    let zeros = vec![0.0; meta.vertex_count()];
    let sk = skeletonize(&grid, &region, &meta, &zeros, &SkeletonParams::default()).map_err(|e| e.to_string())?;
    let f = geometric_features(&sk.main_path_points(), &AxisRoles::default()).map_err(|e| e.to_string())?;
    let want = PI / 5f64.sqrt();
    check((f.bbox_ratio - want).abs() <= 0.1 * want, || format!("semicircle ρ {:.3} vs {want:.3}", f.bbox_ratio))?;
    Ok(format!("tube length {l:.2}/{len}, max axis deviation {dev:.2}; semicircle ρ {:.3} (target {want:.3})", f.bbox_ratio))
}

fn hairpin_scenario() -> Outcome {
    let t = Instant::now();
    let (meta, vel) = scenario_field(Scenario::Hairpin, 96, Execution::Parallel);
    let out = run_all(&meta, &vel, &PipelineParams::default(), Execution::Parallel).map_err(|e| e.to_string())?;
    let elapsed = t.elapsed().as_secs_f64();

    let grid = CellGrid::lambda2(&out.fields, Execution::Parallel);
    let tubes = scenario_tubes(Scenario::Hairpin, 96);
    // a point on each centreline: the hairpin's head apex, then the middles of the straight tubes
    let probes: Vec<Vec3> = tubes
        .iter()
        .map(|t| {
            if t.centerline.len() > 2 {
                t.centerline[t.centerline.len() / 2]
            } else {
                linalg::scale(linalg::add(t.centerline[0], t.centerline[1]), 0.5)
            }
        })
        .collect();
    let leaf_at = |p: Vec3| -> Option<usize> {
        let cell = grid.index(p.map(|x| x.floor() as usize));
        out.split.tree.leaves().find(|l| l.region.contains(cell)).map(|l| l.id)
    };
    let ids: Vec<usize> = probes.iter().map(|&p| leaf_at(p).ok_or_else(|| format!("no leaf at {p:?}"))).collect::<Result<_, _>>()?;
    let candidates: Vec<usize> = out.hairpin.iter().filter(|h| h.is_candidate).map(|h| h.vortex_id).collect();
    check(candidates == vec![ids[0]], || format!("candidates {candidates:?}, hairpin leaf {}", ids[0]))?;
    for &id in &ids[1..] {
        let s = out.hairpin.iter().find(|h| h.vortex_id == id).unwrap();
        check(!s.passed_step1 || !s.passed_step3, || format!("straight tube {id} passes steps 1 and 3"))?;
    }
    check(elapsed < 60.0, || format!("pipeline took {elapsed:.1} s"))?;
    let hp = out.hairpin.iter().find(|h| h.vortex_id == ids[0]).unwrap();
    Ok(format!(
        "{} leaves; only the hairpin (id {}, C̃_h {:.2}) is a candidate; pipeline {elapsed:.1} s",
        out.split.tree.leaves().count(),
        ids[0],
        hp.c_h_tilde
    ))
}

fn clustering_criteria() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let pts: Vec<[f64; 2]> = (0..200)
        .map(|i| {
            let c = (i % 4) as f64;
            if rng.random_bool(0.15) {
                [rng.random_range(-5.0..15.0), rng.random_range(-5.0..15.0)]
            } else {
                [3.0 * c + rng.random_range(-1.0..1.0), 2.0 * c + rng.random_range(-1.0..1.0)]
            }
        })
        .collect();
    let got = dbscan(&pts, 0.6, 5);
    let want = dbscan_oracle::dbscan(&pts, 0.6, 5);
    check(partition(&got) == partition(&want), || "DBSCAN partition differs from the quadratic reference".into())?;
    let (blocks, noise) = partition(&got);

    // two well-separated five-point blobs in 19 dimensions
    let mut rows = Vec::new();
    for b in 0..2 {
        for _ in 0..5 {
            rows.push((0..19).map(|d| if d == b { 10.0 } else { 0.0 } + rng.random_range(-0.5..0.5)).collect::<Vec<f64>>());
        }
    }
    let emb = embed_2d(&rows, &TsneParams { perplexity: 2.5, seed: 1, ..TsneParams::default() }, Execution::Parallel).map_err(|e| e.to_string())?;
    let centroid = |b: usize| {
        let c = &emb.coords[5 * b..5 * b + 5];
        [c.iter().map(|p| p[0]).sum::<f64>() / 5.0, c.iter().map(|p| p[1]).sum::<f64>() / 5.0]
    };
    let (c0, c1) = (centroid(0), centroid(1));
    let spread = |b: usize, c: [f64; 2]| emb.coords[5 * b..5 * b + 5].iter().map(|p| ((p[0] - c[0]).powi(2) + (p[1] - c[1]).powi(2)).sqrt()).fold(0.0, f64::max);
    let ratio = ((c0[0] - c1[0]).powi(2) + (c0[1] - c1[1]).powi(2)).sqrt() / spread(0, c0).max(spread(1, c1));
    check(ratio > 3.0, || format!("blob inter/intra ratio {ratio:.2}"))?;

    // the same request on the same profiles gives the same result, whatever the execution mode
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let bundle = build_bundle(tmp.path(), Scenario::Packet, 64, &packet_params());
    let mut req = ClusterRequest::new(&Preset::Couette.attributes());
    req.perplexity = 3.0;
    req.min_pts = 3;
    req.rng_seed = 5;
    let a = cluster_profiles(&bundle.profiles, &req, Execution::Parallel).map_err(|e| e.to_string())?;
    let b = cluster_profiles(&bundle.profiles, &req, Execution::Sequential).map_err(|e| e.to_string())?;
    let c = cluster_profiles(&bundle.profiles, &req, Execution::Parallel).map_err(|e| e.to_string())?;
    check(a == b && a == c, || "cluster requests are not reproducible".into())?;
    Ok(format!(
        "DBSCAN {} clusters + {} noise equal to the reference; blob ratio {ratio:.1}; {} profiles clustered identically 3×",
        blocks.len(),
        noise.len(),
        a.vortex_ids.len()
    ))
}

fn packet_params() -> PipelineParams {
    let mut p = PipelineParams::default();
    p.split.vsf = 0.05;
    p.cluster = Some(ClusterSettings { preset: Preset::Couette, perplexity: 3.0, eps: None, min_pts: 3, seed: 7, scope: ClusterScope::All });
    p
}

fn bundle_round_trip() -> Outcome {
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let (da, db) = (tmp.path().join("a"), tmp.path().join("b"));
    let bundle = build_bundle(&da, Scenario::Packet, 64, &packet_params());
    build_bundle(&db, Scenario::Packet, 64, &packet_params());
    let files = |d: &std::path::Path| -> Vec<(String, Vec<u8>)> {
        let mut out = Vec::new();
        for sub in ["", "meshes", "skeletons"] {
            let mut names: Vec<_> = std::fs::read_dir(d.join(sub)).unwrap().map(|e| e.unwrap().path()).filter(|p| p.is_file()).collect();
            names.sort();
            out.extend(names.into_iter().map(|p| (p.strip_prefix(d).unwrap().display().to_string(), std::fs::read(&p).unwrap())));
        }
        out
    };
    let (fa, fb) = (files(&da), files(&db));
    check(fa == fb, || "re-run bundle differs".into())?;

    let server = Server::start(bundle.clone(), 2);
    let mut fetched = 0;
    for path in ["/api/manifest", "/api/tree", "/api/profiles", "/api/hairpin/candidates"] {
        let r = server.get(path);
        check(r.status == 200, || format!("{path}: {}", r.status))?;
        let _ = r.json();
        fetched += 1;
    }
    for node in &bundle.tree.nodes {
        let r = server.get(&format!("/api/vortex/{}/mesh", node.id));
        check(r.status == 200, || format!("mesh {}: {}", node.id, r.status))?;
        parse_mesh(&r.body);
        fetched += 1;
        if node.is_leaf {
            let r = server.get(&format!("/api/vortex/{}/skeleton", node.id));
            check(r.status == 200, || format!("skeleton {}: {}", node.id, r.status))?;
            fetched += 1;
        }
    }
    let r = server.post("/api/cluster", r#"{"attribute_names": ["lambda2", "Size", "S_t"], "perplexity": 3, "min_pts": 3}"#);
    check(r.status == 200, || format!("cluster: {} {}", r.status, r.text()))?;
    check(server.get("/api/vortex/999999/mesh").status == 404, || "unknown id is not 404".into())?;
    fetched += 2;

    let mut subtrees = 0;
    for root in bundle.tree.nodes.iter().filter(|n| !n.is_leaf) {
        let mut want: Vec<(usize, usize)> = bundle
            .tree
            .nodes
            .iter()
            .filter(|n| {
                let mut p = n.parent;
                while let Some(q) = p {
                    if q == root.id {
                        return true;
                    }
                    p = bundle.tree.nodes[q].parent;
                }
                false
            })
            .map(|n| (n.id, n.size))
            .collect();
        want.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
        want.truncate(2);
        let doc = server.get(&format!("/api/subtree?root={}&max_nodes=2&sort=Size", root.id)).json();
        let got: Vec<usize> = doc["nodes"].as_array().unwrap()[1..].iter().map(|n| n["id"].as_u64().unwrap() as usize).collect();
        check(got == want.iter().map(|w| w.0).collect::<Vec<_>>(), || format!("subtree of {}: {got:?} vs {want:?}", root.id))?;
        subtrees += 1;
    }
    check(subtrees > 0, || "the bundle has no internal node to query".into())?;
    drop(server);
    check(files(&da) == fa, || "serving modified the bundle".into())?;
    Ok(format!("{} files byte-identical across runs; {fetched} requests served; {subtrees} subtree queries match", fa.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("analytic criteria", analytic_criteria),
        ("equation oracles", equation_oracles),
        ("tree invariants", tree_invariants),
        ("histogram procedures", histogram_procedures),
        ("skeleton contract", skeleton_contract),
        ("end-to-end hairpin scenario", hairpin_scenario),
        ("clustering", clustering_criteria),
        ("bundle round trip", bundle_round_trip),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let t = Instant::now();
        let outcome = std::panic::catch_unwind(run).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        let secs = t.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS [{}] {name}: {detail} ({secs:.1} s)", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL [{}] {name}: {why} ({secs:.1} s)", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
