//! Synthetic datasets with known vortex topology, for demos and tests.

use serde::{Deserialize, Serialize};
use vortex_core::fields::{AxisRoles, GridMeta, VelocityField};
use vortex_core::synthetic::{tube_field, HairpinShape, SwirlTube};
use vortex_core::Execution;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    /// A hairpin, a straight streamwise tube and a straight spanwise tube near the wall.
    Hairpin,
    /// Three separated straight tubes along the three axes.
    Tubes,
    /// Small tubes of assorted shape, orientation and strength, one of them a pair joined by a weak neck.
    Packet,
}

/// Tubes laid out on an `n³` grid with unit spacing; the layout scales with `n`.
pub fn scenario_tubes(scenario: Scenario, n: usize) -> Vec<SwirlTube> {
    let s = n as f64 / 96.0;
    let a = 2.5 * s.max(0.5);
    let gamma = 20.0;
    match scenario {
        Scenario::Hairpin => {
            let hp = HairpinShape {
                x_foot: 15.0 * s,
                x_head: 48.0 * s,
                y_center: 48.0 * s,
                half_width: 12.0 * s,
                z_foot: 8.0 * s,
                z_neck: 30.0 * s,
            };
            vec![
                SwirlTube { centerline: hp.centerline(32), core_radius: a, circulation: gamma },
                SwirlTube::straight([8.0 * s, 12.0 * s, 30.0 * s], [60.0 * s, 12.0 * s, 30.0 * s], a, gamma),
                SwirlTube::straight([78.0 * s, 8.0 * s, 7.0 * s], [78.0 * s, 88.0 * s, 7.0 * s], a, gamma),
            ]
        }
        Scenario::Tubes => vec![
            SwirlTube::straight([10.0 * s, 20.0 * s, 20.0 * s], [86.0 * s, 20.0 * s, 20.0 * s], a, gamma),
            SwirlTube::straight([70.0 * s, 10.0 * s, 50.0 * s], [70.0 * s, 86.0 * s, 50.0 * s], a, gamma),
            SwirlTube::straight([30.0 * s, 70.0 * s, 10.0 * s], [30.0 * s, 70.0 * s, 86.0 * s], a, gamma),
        ],
        Scenario::Packet => {
            let a = 1.5 * s.max(0.5);
            let mut tubes = Vec::new();
            for k in 0..2 {
                for j in 0..2 {
                    for i in 0..3 {
                        let idx = i + 3 * j + 6 * k;
                        let c = [(16.0 + 32.0 * i as f64) * s, (24.0 + 48.0 * j as f64) * s, (24.0 + 48.0 * k as f64) * s];
                        let h = (6.0 + idx as f64) * s;
                        if idx == 5 {
                            // Two collinear tubes with a short gap: one region whose neck
                            // gives way as λ₂ drops.
                            let a = 2.0 * s.max(0.5);
                            let gap = 1.3 * a;
                            let h = 14.0 * s;
                            tubes.push(SwirlTube::straight([c[0] - h, c[1], c[2]], [c[0] - gap, c[1], c[2]], a, 1.8 * gamma));
                            tubes.push(SwirlTube::straight([c[0] + gap, c[1], c[2]], [c[0] + h, c[1], c[2]], a, 1.8 * gamma));
                            continue;
                        }
                        let centerline = match idx % 5 {
                            0 => vec![[c[0] - h, c[1], c[2]], [c[0] + h, c[1], c[2]]],
                            1 => vec![[c[0], c[1] - h, c[2]], [c[0], c[1] + h, c[2]]],
                            2 => vec![[c[0], c[1], c[2] - h], [c[0], c[1], c[2] + h]],
                            3 => {
                                let d = h / 3f64.sqrt();
                                vec![[c[0] - d, c[1] - d, c[2] - d], [c[0] + d, c[1] + d, c[2] + d]]
                            }
                            _ => (0..=16)
                                .map(|q| {
                                    let th = std::f64::consts::PI * q as f64 / 16.0;
                                    [c[0], c[1] - 0.8 * h * th.cos(), c[2] - 0.4 * h + 0.8 * h * th.sin()]
                                })
                                .collect(),
                        };
                        let circulation = gamma * (1.0 + 0.05 * idx as f64);
                        tubes.push(SwirlTube { centerline, core_radius: a, circulation });
                    }
                }
            }
            tubes
        }
    }
}

pub fn scenario_field(scenario: Scenario, n: usize, exec: Execution) -> (GridMeta, VelocityField) {
    let meta = GridMeta::new([n; 3], [1.0; 3], [0.0; 3], AxisRoles::default()).expect("valid grid");
    let field = tube_field(&meta, &scenario_tubes(scenario, n), exec);
    (meta, field)
}
