use std::fmt::Write as _;

use gravikern::forward::io::read_points_csv;
use gravikern::forward::{ForwardEvaluator, GravityConstant};
use gravikern::harmonics::BallQuadrature;

use crate::config::{Loaded, Observable};
use crate::error::{CliError, CliResult};

pub fn run(cfg: &Loaded) -> CliResult<()> {
    let block = cfg.block(&cfg.config.forward, "forward")?;
    let model = cfg
        .density(&block.density, &block.density_file)?
        .ok_or_else(|| CliError::Input("forward needs `density` or `density_file`".into()))?;
    let points = read_points_csv::<f64>(&cfg.read_text(&block.receivers)?)?;
    if block.observables.is_empty() {
        return Err(CliError::Input("`observables` must not be empty".into()));
    }
    let gravity = GravityConstant::new(cfg.config.gravity)?;
    let q = &cfg.config.quadrature;
    let quad = BallQuadrature::new(q.angular_degree, q.radial_points, model.support_radius());
    let ev = ForwardEvaluator::new(&model, gravity, &quad)?;

    let want_phi = block.observables.contains(&Observable::Potential);
    let want_grad = block.observables.contains(&Observable::Gradient);
    let phi = if want_phi { Some(ev.potential_batch(&points)?) } else { None };
    let grad = if want_grad {
        let tensors = ev.gradient_batch(&points)?;
        let local = ev.local_observables_batch(&points)?;
        Some((tensors, local))
    } else {
        None
    };

    let mut out = String::from("x,y,z");
    if want_phi {
        out.push_str(",phi");
    }
    if want_grad {
        out.push_str(",Txx,Tyy,Tzz,Txy,Txz,Tyz,Mplus,Mcross,V");
    }
    out.push('\n');
    for (i, p) in points.iter().enumerate() {
        let _ = write!(out, "{:e},{:e},{:e}", p[0], p[1], p[2]);
        if let Some(phi) = &phi {
            let _ = write!(out, ",{:e}", phi[i]);
        }
        if let Some((tensors, local)) = &grad {
            let t = &tensors[i];
            let o = &local[i].1;
            let _ = write!(
                out,
                ",{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e},{:e}",
                t.xx,
                t.yy,
                t.zz,
                t.xy,
                t.xz,
                t.yz,
                o.m_plus,
                o.m_cross,
                o.v()
            );
        }
        out.push('\n');
    }
    cfg.write(&block.output, out)?;
    Ok(())
}
