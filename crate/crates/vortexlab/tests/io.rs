//! Raw dataset files: write-then-read round trips and descriptor handling.

use std::path::PathBuf;

use proptest::prelude::*;
use vortex_core::fields::{AxisRoles, VelocityField};
use vortexlab::io::{load_field, write_field, ByteOrder, DatasetDescriptor, IoError, Precision};

fn descriptor(dir: &std::path::Path, dims: [usize; 3], precision: Precision, byte_order: ByteOrder, order: [usize; 3]) -> DatasetDescriptor {
    DatasetDescriptor {
        path: dir.join("v.raw"),
        dims,
        spacing: [0.5, 1.0, 0.25],
        origin: [1.0, -2.0, 0.0],
        component_order: order,
        precision,
        byte_order,
        axis_roles: AxisRoles::default(),
    }
}

const ORDERS: [[usize; 3]; 3] = [[0, 1, 2], [2, 0, 1], [1, 2, 0]];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn round_trip_is_bit_identical(
        dims in prop::array::uniform3(2usize..6),
        seed in prop::collection::vec(-1e30f32..1e30, 3),
        wide in any::<bool>(), big in any::<bool>(), order in 0usize..3,
    ) {
        let tmp = tempfile::tempdir().unwrap();
        let precision = if wide { Precision::Float64 } else { Precision::Float32 };
        let byte_order = if big { ByteOrder::Big } else { ByteOrder::Little };
        let desc = descriptor(tmp.path(), dims, precision, byte_order, ORDERS[order]);
        let n = dims.iter().product::<usize>();
        // float32 files only hold f32 values; float64 files get full-precision values
        let data: Vec<[f64; 3]> = (0..n)
            .map(|i| {
                let v = [0, 1, 2].map(|c| seed[c] as f64 * (1.0 + i as f64) - c as f64);
                if wide { v.map(|x| x / 3.0) } else { v.map(|x| x as f32 as f64) }
            })
            .collect();
        let field = VelocityField::new(data.clone());
        write_field(&desc, &field).unwrap();
        prop_assert_eq!(std::fs::metadata(&desc.path).unwrap().len(), desc.expected_bytes());
        let (meta, back) = load_field(&desc).unwrap();
        prop_assert_eq!(meta.dims, dims);
        prop_assert_eq!(meta.spacing, desc.spacing);
        let bits = |d: &[[f64; 3]]| d.iter().flat_map(|v| v.map(f64::to_bits)).collect::<Vec<_>>();
        prop_assert_eq!(bits(&back.data), bits(&data));
    }
}

#[test]
fn descriptor_paths_resolve_next_to_the_file() {
    let tmp = tempfile::tempdir().unwrap();
    let mut desc = descriptor(tmp.path(), [2, 3, 2], Precision::Float32, ByteOrder::Little, [0, 1, 2]);
    write_field(&desc, &VelocityField::new(vec![[1.0, 2.0, 3.0]; 12])).unwrap();
    desc.path = PathBuf::from("v.raw");
    let json = tmp.path().join("d.json");
    desc.write(&json).unwrap();
    let read = DatasetDescriptor::read(&json).unwrap();
    assert_eq!(read.path, tmp.path().join("v.raw"));
    let (_, v) = load_field(&read).unwrap();
    assert_eq!(v.data[11], [1.0, 2.0, 3.0]);
}

#[test]
fn size_mismatch_reports_both_lengths() {
    let tmp = tempfile::tempdir().unwrap();
    let desc = descriptor(tmp.path(), [3, 3, 3], Precision::Float64, ByteOrder::Little, [0, 1, 2]);
    std::fs::write(&desc.path, vec![0u8; 100]).unwrap();
    match load_field(&desc) {
        Err(e @ IoError::SizeMismatch { expected: 648, actual: 100, .. }) => {
            let msg = e.to_string();
            assert!(msg.contains("648") && msg.contains("100"), "{msg}");
        }
        other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn digest_tracks_layout_and_content() {
    let tmp = tempfile::tempdir().unwrap();
    let desc = descriptor(tmp.path(), [2, 2, 2], Precision::Float32, ByteOrder::Little, [0, 1, 2]);
    write_field(&desc, &VelocityField::new(vec![[0.5; 3]; 8])).unwrap();
    let a = desc.digest().unwrap();
    assert_eq!(a, desc.digest().unwrap());
    let mut moved = desc.clone();
    moved.origin = [9.0; 3];
    assert_ne!(a, moved.digest().unwrap());
    write_field(&desc, &VelocityField::new(vec![[0.25; 3]; 8])).unwrap();
    assert_ne!(a, desc.digest().unwrap());
}
