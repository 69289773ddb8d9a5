//! Mass matrix, gravity and Coriolis terms of the default chain in full and
//! reduced coordinates, plus a forward/inverse dynamics round trip.

use flying_chain::chain::{ChainParameters, Coordinates};

fn main() -> flying_chain::Result<()> {
    let params = ChainParameters::two_link_default();
    let q = [0.3, -0.7, 0.1, 1.2];
    let qdot = [-6.0, 2.0, 0.5, 3.0];

    let full = params.dynamics_terms(&q, &qdot, Coordinates::Full)?;
    println!("full mass matrix:{}", full.mass);
    println!("full gravity: {:.4?}", full.gravity.as_slice());

    let reduced = params.dynamics_terms(&q[..2], &qdot[..2], Coordinates::Reduced)?;
    println!("reduced mass matrix:{}", reduced.mass);
    // Gravity acts only on the CoM, so the reduced vector vanishes.
    println!("reduced gravity: {:.1e}", reduced.gravity.amax());

    let tau = [1.5];
    let qddot = params.forward_dynamics(&q[..2], &qdot[..2], &tau, Coordinates::Reduced)?;
    let forces = params.inverse_dynamics_reduced(&q[..2], &qdot[..2], qddot.as_slice())?;
    println!("forward accelerations: {:.4?}", qddot.as_slice());
    println!("inverse dynamics recovers (0, tau): {:.4?}", forces.as_slice());

    let full_acc = params.forward_dynamics(&q, &qdot, &tau, Coordinates::Full)?;
    println!("full accelerations: {:.4?}", full_acc.as_slice());
    println!(
        "chain CoM in the first-link frame: {:.4?}",
        params.chain_com(&q[..2])?.as_slice()
    );
    Ok(())
}
