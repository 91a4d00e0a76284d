//! Fit class-conditional term weights on labeled documents and embed new text.

use rkmssl::{embed, fit_term_weights, ClassId, Corpus, Document, TokenizerConfig};

fn main() -> rkmssl::Result<()> {
    let config = TokenizerConfig::default();
    let docs = [
        ("sport/1", "goal match team goal referee", 0),
        ("sport/2", "team season match win", 0),
        ("tech/1", "kernel compiler memory bug", 1),
        ("tech/2", "compiler release memory team", 1),
    ];
    let corpus = Corpus::new(
        vec!["sport".into(), "tech".into()],
        docs.iter().map(|&(id, text, c)| {
            (
                Document::from_text(id, text, &config),
                Some(ClassId::new(c)),
            )
        }),
    )?;
    let weights = fit_term_weights(&corpus, 1.0)?;

    println!("{:<10} {:>8} {:>8}", "term", "sport", "tech");
    for term in weights.vocabulary() {
        let row = weights.row(term);
        println!("{term:<10} {:>8.4} {:>8.4}", row[0], row[1]);
    }
    println!(
        "{:<10} {:>8.4} {:>8.4}",
        "<unseen>",
        weights.oov_row()[0],
        weights.oov_row()[1]
    );
    println!("column sums: {:?}", weights.column_sums());

    for text in ["the team scored a late goal", "memory leak in the compiler"] {
        let v = embed(&Document::from_text("q", text, &config), &weights)?;
        println!("{text:?} -> {:?}", v.as_slice());
    }
    Ok(())
}
