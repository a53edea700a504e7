use kpp_core::capacity::{capacity_at, sigmoid_weight, smooth_frame, SigmoidSchedule, SmoothingFilter};
use kpp_core::domain::{segment_mask, Axis, CapacityFrame, Field2D, GridSpec, MapMask, Segment};
use kpp_core::kernels::{cfl, Capacity, SolverParams, Stepper};
use kpp_core::linalg::{apply_second_difference, solve_tridiagonal, TridiagSystem};
use kpp_core::reference::front_position;
use proptest::prelude::*;

fn mask_strategy(max: usize) -> impl Strategy<Value = (usize, usize, Vec<bool>)> {
    (1..=max, 1..=max).prop_flat_map(|(nx, ny)| {
        (Just(nx), Just(ny), proptest::collection::vec(proptest::bool::weighted(0.7), nx * ny))
    })
}

/// Maximal runs by direct scan.
fn brute_runs(cells: &[bool]) -> Vec<(usize, usize)> {
    let mut out = Vec::new();
    let mut i = 0;
    while i < cells.len() {
        if cells[i] {
            let s = i;
            while i + 1 < cells.len() && cells[i + 1] {
                i += 1;
            }
            out.push((s, i));
        }
        i += 1;
    }
    out
}

proptest! {
    #[test]
    fn tridiagonal_residual_is_small(
        (sub, sup) in (-1.0..1.0f64, -1.0..1.0f64),
        diag in proptest::collection::vec(2.1..5.0f64, 1..120),
        seed in any::<u64>(),
    ) {
        let rhs: Vec<f64> = (0..diag.len()).map(|i| ((seed.wrapping_add(i as u64) % 1000) as f64 - 500.0) / 100.0).collect();
        let sys = TridiagSystem::new(sub, sup, diag, rhs.clone()).unwrap();
        let x = solve_tridiagonal(&sys).unwrap();
        let r = sys.apply(&x);
        for (a, b) in r.iter().zip(&rhs) {
            prop_assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn second_difference_is_symmetric(
        v in proptest::collection::vec(-1.0..1.0f64, 1..40),
        seed in -1.0..1.0f64,
    ) {
        let w: Vec<f64> = v.iter().enumerate().map(|(i, x)| x * seed + i as f64 * 0.01).collect();
        let (av, aw) = (apply_second_difference(&v), apply_second_difference(&w));
        let lhs: f64 = av.iter().zip(&w).map(|(a, b)| a * b).sum();
        let rhs: f64 = v.iter().zip(&aw).map(|(a, b)| a * b).sum();
        prop_assert!((lhs - rhs).abs() < 1e-12);
        // row sums: 0 inside, -1 at each end
        let ones = apply_second_difference(&vec![1.0; v.len()]);
        let n = v.len();
        for (i, s) in ones.iter().enumerate() {
            let want = match (i == 0, i + 1 == n) {
                (true, true) => -2.0,
                (true, false) | (false, true) => -1.0,
                _ => 0.0,
            };
            prop_assert_eq!(*s, want);
        }
    }

    #[test]
    fn segmentation_matches_scan((nx, ny, land) in mask_strategy(24)) {
        let g = GridSpec::new(nx, ny, 1.0).unwrap();
        let mask = MapMask::new(g, land.clone()).unwrap();
        let seg = segment_mask(&mask);
        for row in 0..ny {
            let want = brute_runs(&land[row * nx..(row + 1) * nx]);
            let got: Vec<(usize, usize)> = seg.line(Axis::X, row).iter().map(|s| (s.start, s.end)).collect();
            prop_assert_eq!(got, want);
        }
        for col in 0..nx {
            let column: Vec<bool> = (0..ny).map(|r| land[r * nx + col]).collect();
            let got: Vec<(usize, usize)> = seg.line(Axis::Y, col).iter().map(|s| (s.start, s.end)).collect();
            prop_assert_eq!(got, brute_runs(&column));
        }
        let land_count = land.iter().filter(|&&b| b).count();
        prop_assert_eq!(seg.covered_cells(Axis::X), land_count);
        prop_assert_eq!(seg.covered_cells(Axis::Y), land_count);
        // rebuilding from the covered cells gives the same segmentation
        let mut covered = vec![false; nx * ny];
        for row in 0..ny {
            for s in seg.line(Axis::X, row) {
                for c in s.start..=s.end {
                    covered[row * nx + c] = true;
                }
            }
        }
        prop_assert_eq!(segment_mask(&MapMask::new(g, covered).unwrap()), seg);
    }

    #[test]
    fn front_position_is_translation_equivariant(
        profile in proptest::collection::vec(0.0..1.0f64, 2..30),
        shift in 0usize..20,
        dx in 0.05..2.0f64,
    ) {
        let mut u = vec![1.0];
        u.extend(profile);
        u.push(0.0);
        let mut shifted = vec![1.0; shift];
        shifted.extend_from_slice(&u);
        if let Some(x) = front_position(&u, 1.0, dx) {
            let y = front_position(&shifted, 1.0, dx).unwrap();
            prop_assert!((y - x - shift as f64 * dx).abs() < 1e-9 * (1.0 + y.abs()));
        } else {
            prop_assert!(front_position(&shifted, 1.0, dx).is_none());
        }
    }

    #[test]
    fn sigmoid_is_monotone_and_antisymmetric(
        t_low in -100.0..100.0f64,
        span in 0.1..50.0f64,
        a in 0.0..1.0f64,
        b in 0.0..1.0f64,
        nu in 0.3..2.0f64,
    ) {
        let t_high = t_low + span;
        let (lo, hi) = (a.min(b), a.max(b));
        let s_lo = sigmoid_weight(t_low + lo * span, t_low, t_high, nu).unwrap();
        let s_hi = sigmoid_weight(t_low + hi * span, t_low, t_high, nu).unwrap();
        prop_assert!(s_lo <= s_hi + 1e-15);
        prop_assert!((0.0..=1.0).contains(&s_lo));
        let fwd = sigmoid_weight(t_low + a * span, t_low, t_high, nu).unwrap();
        let bwd = sigmoid_weight(t_high - a * span, t_low, t_high, nu).unwrap();
        prop_assert!((fwd + bwd - 1.0).abs() < 1e-12);
    }

    #[test]
    fn interpolated_capacity_stays_between_frames(
        (nx, ny, land) in mask_strategy(8),
        frac in 0.0..1.0f64,
        seed in any::<u32>(),
    ) {
        let g = GridSpec::new(nx, ny, 1.0).unwrap();
        let val = |i: usize, salt: u32| {
            if land[i] { 0.05 + 0.95 * (((i as u32).wrapping_mul(2654435761).wrapping_add(seed ^ salt)) % 1000) as f64 / 1000.0 } else { 0.0 }
        };
        let a = CapacityFrame::new(g, 0.0, (0..nx * ny).map(|i| val(i, 1)).collect()).unwrap();
        let b = CapacityFrame::new(g, 10.0, (0..nx * ny).map(|i| val(i, 2)).collect()).unwrap();
        let sched = SigmoidSchedule::new(vec![a.clone(), b.clone()], 1.0).unwrap();
        let k = capacity_at(&sched, 10.0 * frac).unwrap();
        for i in 0..nx * ny {
            let (lo, hi) = (a.values()[i].min(b.values()[i]), a.values()[i].max(b.values()[i]));
            prop_assert!(k.values()[i] >= lo - 1e-15 && k.values()[i] <= hi + 1e-15);
        }
    }

    #[test]
    fn smoothing_matches_window_average(
        (nx, ny, land) in mask_strategy(10),
        half_width in 1usize..4,
    ) {
        // windows wider than the map would alias in the wrapped direction
        prop_assume!(nx + 1 >= 2 * half_width);
        let g = GridSpec::new(nx, ny, 1.0).unwrap();
        let values: Vec<f64> = (0..nx * ny).map(|i| if land[i] { 0.1 + 0.9 * ((i * 37) % 11) as f64 / 10.0 } else { 0.0 }).collect();
        let frame = CapacityFrame::new(g, 0.0, values.clone()).unwrap();
        let mask = MapMask::new(g, land.clone()).unwrap();
        let out = smooth_frame(&frame, &mask, &SmoothingFilter::new(half_width).unwrap()).unwrap();
        let l = half_width as f64;
        let (lo, hi) = values.iter().zip(&land).filter(|p| *p.1).fold((1.0f64, 0.0f64), |(lo, hi), (&v, _)| (lo.min(v), hi.max(v)));
        for r in 0..ny {
            for c in 0..nx {
                let i = r * nx + c;
                if !land[i] {
                    prop_assert_eq!(out.values()[i], 0.0);
                    continue;
                }
                // brute force over every land pixel, wrapping columns
                let (mut acc, mut tot) = (0.0, 0.0);
                for rr in 0..ny {
                    for cc in 0..nx {
                        if !land[rr * nx + cc] {
                            continue;
                        }
                        let di = rr as f64 - r as f64;
                        let raw = (cc as isize - c as isize).rem_euclid(nx as isize) as f64;
                        let candidates = [raw, raw - nx as f64];
                        for dj in candidates {
                            if di.abs() < l && dj.abs() < l {
                                let w = (1.0 - (di / l).powi(2)) * (1.0 - (dj / l).powi(2));
                                acc += w * values[rr * nx + cc];
                                tot += w;
                            }
                        }
                    }
                }
                prop_assert!((out.values()[i] - acc / tot).abs() < 1e-12);
                prop_assert!(out.values()[i] >= lo - 1e-12 && out.values()[i] <= hi + 1e-12);
            }
        }
    }

    #[test]
    fn step_preserves_reflection_symmetry(
        half in 1usize..5,
        ny in 1usize..6,
        seed in any::<u64>(),
        step_index in 0u64..4,
        alternate in any::<bool>(),
    ) {
        let nx = 2 * half + 1;
        let g = GridSpec::new(nx, ny, 0.5).unwrap();
        let v = |r: usize, c: usize, salt: u64| {
            let c = c.min(nx - 1 - c) as u64;
            ((seed ^ salt).wrapping_add(r as u64 * 131 + c * 17) % 997) as f64 / 997.0
        };
        let land: Vec<bool> = (0..nx * ny).map(|i| v(i / nx, i % nx, 7) > 0.2).collect();
        let k: Vec<f64> = (0..nx * ny).map(|i| if land[i] { 0.1 + 0.9 * v(i / nx, i % nx, 9) } else { 0.0 }).collect();
        let mut u = Field2D::from_fn(g, |r, c| if land[r * nx + c] { v(r, c, 3) } else { 0.0 });
        let frame = CapacityFrame::new(g, 0.0, k).unwrap();
        let seg = segment_mask(&MapMask::new(g, land).unwrap());
        let params = SolverParams::new(0.125, 0.5).unwrap().with_alternate_directions(alternate);
        Stepper::new(params, &g).step(&mut u, &seg, Capacity::Static(&frame), step_index).unwrap();
        for r in 0..ny {
            for c in 0..nx {
                prop_assert!((u.get(r, c) - u.get(r, nx - 1 - c)).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn cfl_depends_only_on_ratio(h in 1e-3..2.0f64, dx in 0.05..2.0f64, s in 0.1..10.0f64) {
        let k1 = cfl(h, dx);
        let k2 = cfl(h * s * s, dx * s);
        prop_assert!((k1 - k2).abs() <= 1e-12 * k1);
        prop_assert_eq!(SolverParams::new(h, dx).unwrap().k(), k1);
    }
}

#[test]
fn all_land_rectangle_has_one_segment_per_line() {
    let g = GridSpec::new(7, 4, 1.0).unwrap();
    let seg = segment_mask(&MapMask::all_land(g));
    assert_eq!(seg.row_counts(), vec![1; 4]);
    assert_eq!(seg.column_counts(), vec![1; 7]);
    assert_eq!(seg.line(Axis::X, 2), &[Segment { start: 0, end: 6 }]);
}

#[test]
fn uniform_runs_stay_below_one() {
    let g = GridSpec::new(41, 41, 0.4).unwrap();
    let seg = segment_mask(&MapMask::all_land(g));
    let mut u = Field2D::from_fn(g, |r, c| {
        let (x, y) = (c as f64 - 20.0, r as f64 - 20.0);
        (-(x * x + y * y) * 0.16 / 2.0).exp()
    });
    let params = SolverParams::new(0.1, 0.4).unwrap();
    let mut stepper = Stepper::new(params, &g);
    for s in 0..150 {
        stepper.step(&mut u, &seg, Capacity::Uniform, s).unwrap();
        assert!(u.max() <= 1.0 + 1e-6, "step {s}: {}", u.max());
    }
    assert!(u.get(20, 20) > 0.99);
}

#[test]
fn zero_is_a_fixed_point() {
    let g = GridSpec::new(9, 5, 0.3).unwrap();
    let seg = segment_mask(&MapMask::all_land(g));
    let mut u = Field2D::zeros(g);
    let frame = CapacityFrame::uniform(g, 0.0, 0.5).unwrap();
    let mut stepper = Stepper::new(SolverParams::new(0.2, 0.3).unwrap(), &g);
    for s in 0..5 {
        stepper.step(&mut u, &seg, Capacity::Static(&frame), s).unwrap();
    }
    assert!(u.values().iter().all(|&v| v == 0.0));
}

#[test]
fn repeated_steps_are_bit_identical() {
    let g = GridSpec::new(13, 9, 0.4).unwrap();
    let land: Vec<bool> = (0..g.cells()).map(|i| (i * 7) % 5 != 0).collect();
    let seg = segment_mask(&MapMask::new(g, land.clone()).unwrap());
    let u0 = Field2D::from_fn(g, |r, c| if land[r * 13 + c] { ((r * 3 + c) % 7) as f64 / 7.0 } else { 0.0 });
    let run = || {
        let mut u = u0.clone();
        let mut st = Stepper::new(SolverParams::new(0.1, 0.4).unwrap(), &g);
        for s in 0..10 {
            st.step(&mut u, &seg, Capacity::Uniform, s).unwrap();
        }
        u
    };
    let (a, b) = (run(), run());
    assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
}
