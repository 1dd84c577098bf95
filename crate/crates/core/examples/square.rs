use std::sync::Arc;

use h2mul::*;

fn main() -> Result<()> {
    let mesh = build_sphere_mesh(4);
    let tree = Arc::new(build_cluster_tree(&mesh, 16)?);
    let blocks = Arc::new(build_block_tree(tree.clone(), tree, 1.0)?);
    let g = assemble_h2(&mesh, blocks.clone(), &LaplaceSingleLayer, &InterpolationScheme::new(3)?)?;
    let z = multiply(&g, &g, &blocks, &TruncationControl::new(1e-4, 0.25)?)?;
    let y = z.matvec(&vec![1.0; z.ncols()])?;
    println!("n = {}, |Z 1| = {:.6e}", z.nrows(), y.iter().map(|v| v * v).sum::<f64>().sqrt());
    Ok(())
}
