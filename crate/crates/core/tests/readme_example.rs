use fracg::{FracGOperator, KernelModel, OperatorParams, ScalarField64, YoungFunction64};

#[test]
fn readme_example_runs() -> fracg::Result<()> {
    let young = YoungFunction64::parse("power:3")?;
    let op = FracGOperator::new(&young, OperatorParams::new(0.5), KernelModel::fractional(0.5))?;
    let u = ScalarField64::gaussian(vec![0.0], 1.0, 1.0);
    let v = op.eval(&u, &[0.0])?;
    assert!((v.value - 4.614_780_266_318_053).abs() < 1e-4);
    assert!(v.tail_bound >= 0.0);
    Ok(())
}
