"""Patch-grid image classification with majority voting.

Images are (H, W, 3) uint8 numpy arrays throughout. The heavy lifting lives
in the compiled `_core` module; this package only re-exports it.
"""

from patchvote._core import (
    Model,
    Rng,
    adjust_brightness,
    central_crop,
    class_histogram,
    evaluate,
    flip,
    generate_dataset,
    load_manifest,
    read_image,
    resize,
    rotate90,
    run_experiment,
    stratified_folds,
    subsample_manifest,
    tang_sample,
    tdli_expand,
    tile,
    train_model,
    vl_protocol,
    write_jpeg,
    write_png,
)

__version__ = "0.1.0"

__all__ = [
    "Model",
    "Rng",
    "adjust_brightness",
    "central_crop",
    "class_histogram",
    "evaluate",
    "flip",
    "generate_dataset",
    "load_manifest",
    "read_image",
    "resize",
    "rotate90",
    "run_experiment",
    "stratified_folds",
    "subsample_manifest",
    "tang_sample",
    "tdli_expand",
    "tile",
    "train_model",
    "vl_protocol",
    "write_jpeg",
    "write_png",
]
