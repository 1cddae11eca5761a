use natlog::model::Variant;
use natlog::trainer::{gradcheck_harness, grad_check};

fn main() {
    let (params, examples) = gradcheck_harness(17, Variant::Tied, 10);
    for eps in [1e-4, 1e-5, 1e-6, 1e-7] {
        let r = grad_check(&params, &examples, eps);
        println!("eps={eps:.0e}  max_rel={:.3e}", r.max_relative_error);
        for t in &r.per_tensor {
            println!("   {:-24} {:.3e}", t.name, t.max_relative_error);
        }
    }
}
