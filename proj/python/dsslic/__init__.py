# Copyright 2026 the dsslic authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     https://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Python surface of the layered semantic-segmentation image codec."""

try:
    # Installed wheel: the extension lives inside the package.
    from dsslic._dsslic import (  # noqa: F401
        BackendError,
        DataError,
        UsageError,
        __version__,
        bpp,
        container_roundtrip,
        decode_file,
        encode_file,
        init_weights,
        l1_loss,
        lr_schedule,
        minmax_denormalize,
        minmax_normalize,
        ms_ssim,
        perceptual_schedule,
        psnr,
        set_num_threads,
        ssim_loss,
    )
except ImportError:
    # Build tree: the extension sits on PYTHONPATH as a top-level module.
    from _dsslic import (  # noqa: F401
        BackendError,
        DataError,
        UsageError,
        __version__,
        bpp,
        container_roundtrip,
        decode_file,
        encode_file,
        init_weights,
        l1_loss,
        lr_schedule,
        minmax_denormalize,
        minmax_normalize,
        ms_ssim,
        perceptual_schedule,
        psnr,
        set_num_threads,
        ssim_loss,
    )

__all__ = [
    "BackendError",
    "DataError",
    "UsageError",
    "__version__",
    "bpp",
    "container_roundtrip",
    "decode_file",
    "encode_file",
    "init_weights",
    "l1_loss",
    "lr_schedule",
    "minmax_denormalize",
    "minmax_normalize",
    "ms_ssim",
    "perceptual_schedule",
    "psnr",
    "set_num_threads",
    "ssim_loss",
]
