use proptest::prelude::*;
use psdo::container::{decode, encode};
use psdo::report::Table;
use psdo_core::geometry::{Base, BoundaryMode, ConeSpec, Geometry};
use psdo_core::quantize::DiscretizedOperator;
use psdo_core::{CMat, C64};

fn geometry() -> impl Strategy<Value = Geometry> {
    let even = (4usize..7).prop_map(|k| 2 * k);
    prop_oneof![
        (even.clone(), 1usize..3).prop_map(|(n, q)| Geometry::circle(n, q).unwrap()),
        (even.clone(), 0.5..5.0f64, any::<bool>(), any::<bool>()).prop_map(|(n, t, periodic, circ)| {
            let base = if circ { Base::Circle(8) } else { Base::Point };
            let mode = if periodic { BoundaryMode::Periodic } else { BoundaryMode::Interval };
            Geometry::cone(ConeSpec::new(base, t, n, mode), 1).unwrap()
        }),
        (even, 0.5..5.0f64).prop_map(|(n, t)| Geometry::edge(8, ConeSpec::new(Base::Point, t, n, BoundaryMode::Periodic), 1).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn container_round_trip_is_bit_exact(g in geometry(), v in any::<f64>(), bits in prop::collection::vec(any::<u64>(), 2)) {
        let n = g.dim();
        let m = CMat::from_fn(n, n, |i, j| {
            let k = (i * 31 + j * 17) as u64;
            C64::new(f64::from_bits(bits[0].rotate_left(k as u32) ^ k), f64::from_bits(bits[1] ^ k.wrapping_mul(0x9e37)))
        });
        let op = DiscretizedOperator::new(g, v, m);
        let bytes = encode(&op);
        let back = decode(&bytes).unwrap();
        prop_assert_eq!(&back.geometry, &op.geometry);
        prop_assert_eq!(back.v.to_bits(), op.v.to_bits());
        for (a, b) in back.matrix.iter().zip(op.matrix.iter()) {
            prop_assert_eq!((a.re.to_bits(), a.im.to_bits()), (b.re.to_bits(), b.im.to_bits()));
        }
        prop_assert_eq!(encode(&back), bytes);
    }

    #[test]
    fn csv_rows_match_table(rows in prop::collection::vec((any::<i32>(), -1e6..1e6f64), 0..20)) {
        let mut t = Table::new(&[("k", ""), ("value", "unit")]);
        for (k, v) in &rows {
            t.push(vec![serde_json::json!(k), serde_json::json!(v)]);
        }
        let csv = t.to_csv().unwrap();
        let mut r = csv::Reader::from_reader(csv.as_bytes());
        let parsed: Vec<(i32, f64)> = r.records().map(|rec| {
            let rec = rec.unwrap();
            (rec[0].parse().unwrap(), rec[1].parse().unwrap())
        }).collect();
        prop_assert_eq!(parsed, rows);
    }
}
