from ._core import (  # noqa: F401
    __version__,
    apt_reward,
    aps_combined,
    baseline_names,
    diayn_reward,
    encode,
    homeo_trace,
    parse_variant,
    run_finetune,
    run_pretrain,
    sample_task,
    solve_w,
    value_promise,
    variant_names,
    visr_reward,
)
