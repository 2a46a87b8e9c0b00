#![no_main]
use empath_core::kripke::{validate_frame, KripkeModel, ModelDump};
use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(dump) = serde_json::from_slice::<ModelDump>(data) else { return };
    if let Ok((model, _)) = KripkeModel::from_dump(&dump) {
        let _ = validate_frame(&model);
    }
});
