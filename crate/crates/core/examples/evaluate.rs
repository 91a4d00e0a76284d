//! Confusion matrix and micro/macro precision, recall and F1.

use rkmssl::{score, ClassId, ConfusionMatrix};

fn main() -> rkmssl::Result<()> {
    let mut cm = ConfusionMatrix::new(vec!["spam".into(), "ham".into(), "news".into()]);
    let decisions = [
        (0, 0),
        (0, 0),
        (0, 1),
        (1, 1),
        (1, 1),
        (1, 1),
        (1, 2),
        (2, 2),
        (2, 0),
        (2, 2),
    ];
    for (truth, predicted) in decisions {
        cm.record(ClassId::new(truth), ClassId::new(predicted))?;
    }
    for (name, row) in cm.classes().iter().zip(cm.rows()) {
        println!("{name:>5} {row:?}");
    }
    print!("{}", score(&cm)?.to_kv());
    Ok(())
}
