//! The odometer map on binary expansions: level intervals, the data-starving sets `B_n`
//! and the disjointness of their backward images.

use forecast_limits::exact::BinaryPoint;
use forecast_limits::odometer::{
    apply_t, build_b, build_c, disjointness_check, image_of_interval, interval_i, Direction,
};

fn main() -> forecast_limits::Result<()> {
    let x = BinaryPoint::from_bits(&[0, 0, 1, 1], 16)?;
    let tx = apply_t(&x, Direction::Forward)?;
    println!("T(0.0011) = 0.{}", bits(&tx, 6)?);
    println!("T^-1 T x = x: {}", apply_t(&tx, Direction::Inverse)? == x);

    for j in 1..4 {
        println!(
            "I^2_{j} = {:?} maps onto {:?} (I^2_{} = {:?})",
            interval_i(2, j)?,
            image_of_interval(2, j)?,
            j - 1,
            interval_i(2, j - 1)?
        );
    }

    for n in [1u64, 2, 3, 5, 8, 13, 32] {
        let b = build_b(n)?;
        println!(
            "B_{n} = {b:?}, measure {}, T^0..T^-{n} images disjoint: {}",
            b.measure()?,
            disjointness_check(&b, n)?
        );
    }
    for k in 2..=6 {
        println!("measure of C_{k} = {}", build_c(k)?.measure()?);
    }
    Ok(())
}

fn bits(p: &BinaryPoint, len: usize) -> forecast_limits::Result<String> {
    Ok(p.bits(len)?.into_iter().map(|b| if b { '1' } else { '0' }).collect())
}
