# Copyright 2026 The facecut-pipeline Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Regenerates the test extractors. tiny_backbone.onnx has two
conv/ReLU/max-pool stages, 3 -> 6 channels, and no classification layer; a
32x32 input yields a 6x8x8 tap. tiny_pooled_backbone.onnx ends in a
flattened global average."""

import torch
from torch import nn

torch.manual_seed(0)
model = nn.Sequential(
    nn.Conv2d(3, 4, 3, padding=1), nn.ReLU(), nn.MaxPool2d(2),
    nn.Conv2d(4, 6, 3, padding=1), nn.ReLU(), nn.MaxPool2d(2),
)
model.eval()
torch.onnx.export(model, torch.zeros(1, 3, 32, 32), "tiny_backbone.onnx",
                  input_names=["input"], output_names=["features"],
                  opset_version=11, dynamo=False)

# Same stages ending in global pooling and flatten: no spatial feature maps.
pooled = nn.Sequential(*model, nn.AdaptiveAvgPool2d(1), nn.Flatten())
pooled.eval()
torch.onnx.export(pooled, torch.zeros(1, 3, 32, 32), "tiny_pooled_backbone.onnx",
                  input_names=["input"], output_names=["features"],
                  opset_version=11, dynamo=False)
