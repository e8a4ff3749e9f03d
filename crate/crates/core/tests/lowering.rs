mod common;

use common::hoas::{eval, transcriptions};
use common::*;

#[test]
fn lowered_programs_agree_with_closure_transcriptions() {
    for (name, transcription) in transcriptions() {
        let lowered = output(run(name));
        let expected = eval(&transcription).to_string();
        assert_eq!(lowered.lines().next(), Some(expected.as_str()), "{name}");
    }
}

#[test]
fn context_operands_lower_to_closures() {
    let p = compile("count_words.ctx").unwrap();
    let main = p.core.main.as_ref().unwrap().to_string();
    assert!(main.contains("(lambda ($f0)"), "{main}");
    assert!(main.contains("(lambda ($f1)"), "{main}");
    // Generic names are erased: no trace of the user's spellings remains.
    assert!(!main.contains("\"acc\"") && !main.contains("\"n\""), "{main}");
}
