/*
 * Copyright 2026 The Forge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "catalog.hpp"

#include <array>
#include <regex>

namespace forge::lint {

namespace {

constexpr std::array<std::string_view, 9> kTorchMatmul = {
    "matmul", "mm", "bmm", "einsum", "addmm", "baddbmm", "addbmm", "mv", "chain_matmul",
};

constexpr std::array<std::string_view, 6> kTensorMethods = {
    "matmul", "mm", "bmm", "addmm", "baddbmm", "mv",
};

// torch.nn.functional entries: pooling, convolution, normalization,
// activation, softmax, plus the dense/attention products.
constexpr std::array<std::string_view, 56> kFunctionalOps = {
    "avg_pool1d", "avg_pool2d", "avg_pool3d", "max_pool1d", "max_pool2d", "max_pool3d",
    "max_pool1d_with_indices", "max_pool2d_with_indices", "max_pool3d_with_indices",
    "adaptive_avg_pool1d", "adaptive_avg_pool2d", "adaptive_avg_pool3d", "adaptive_max_pool1d",
    "adaptive_max_pool2d", "adaptive_max_pool3d", "lp_pool1d", "lp_pool2d", "lp_pool3d",
    "fractional_max_pool2d", "fractional_max_pool3d", "max_unpool1d", "max_unpool2d",
    "max_unpool3d", "conv1d", "conv2d", "conv3d", "conv_transpose1d", "conv_transpose2d",
    "conv_transpose3d", "batch_norm", "layer_norm", "group_norm", "instance_norm", "rms_norm",
    "local_response_norm", "normalize", "relu", "relu6", "elu", "selu", "celu", "gelu", "silu",
    "mish", "sigmoid", "tanh", "hardtanh", "hardswish", "leaky_relu", "softplus", "softmax",
    "log_softmax", "softmin", "linear", "bilinear", "scaled_dot_product_attention",
};

constexpr std::array<std::string_view, 14> kFunctionalOpsExtra = {
    "relu_", "elu_", "leaky_relu_", "hardtanh_", "hardsigmoid", "logsigmoid", "prelu", "rrelu",
    "glu", "softsign", "tanhshrink", "threshold", "gumbel_softmax", "multi_head_attention_forward",
};

constexpr std::array<std::string_view, 11> kAtenOps = {
    "mm", "bmm", "addmm", "baddbmm", "matmul", "convolution", "conv1d", "conv2d", "conv3d",
    "_convolution", "cudnn_convolution",
};

template <std::size_t N>
bool contains(const std::array<std::string_view, N>& set, std::string_view item) {
  for (std::string_view s : set) {
    if (s == item) return true;
  }
  return false;
}

bool starts_with(std::string_view s, std::string_view prefix) { return s.substr(0, prefix.size()) == prefix; }

std::string_view first_segment(std::string_view s) { return s.substr(0, s.find('.')); }

std::string_view last_segment(std::string_view s) {
  std::size_t dot = s.rfind('.');
  return dot == std::string_view::npos ? s : s.substr(dot + 1);
}

}  // namespace

std::optional<std::string> match_forbidden_function(std::string_view path) {
  // extern_kernels.<anything>, however the namespace was imported.
  for (std::size_t pos = 0; (pos = path.find("extern_kernels", pos)) != std::string_view::npos; pos += 14) {
    bool seg_start = pos == 0 || path[pos - 1] == '.';
    bool has_member = pos + 14 < path.size() && path[pos + 14] == '.';
    if (seg_start && has_member) return std::string(path.substr(pos));
  }
  if (starts_with(path, "torch.nn.functional.")) {
    std::string_view op = path.substr(20);
    if (op.find('.') == std::string_view::npos && (contains(kFunctionalOps, op) || contains(kFunctionalOpsExtra, op))) {
      return std::string(path);
    }
    return std::nullopt;
  }
  if (starts_with(path, "torch.ops.aten.")) {
    std::string_view op = first_segment(path.substr(15));
    if (contains(kAtenOps, op)) return std::string("torch.ops.aten.") + std::string(op);
    return std::nullopt;
  }
  if (starts_with(path, "torch.")) {
    std::string_view rest = path.substr(6);
    if (rest.find('.') == std::string_view::npos) {
      if (contains(kTorchMatmul, rest)) return std::string(path);
      if (starts_with(rest, "conv")) return std::string(path);
    }
    if (rest == "functional.einsum" || rest == "linalg.matmul" || rest == "linalg.multi_dot") {
      return std::string(path);
    }
    if (starts_with(rest, "Tensor.") && contains(kTensorMethods, rest.substr(7))) return std::string(path);
  }
  return std::nullopt;
}

std::optional<std::string> match_forbidden_module(std::string_view path) {
  if (!starts_with(path, "torch.nn.")) return std::nullopt;
  static const std::regex kModule(R"(^((Lazy)?Conv(Transpose)?[123]d|(Lazy)?Linear|Bilinear|.*Norm.*|MultiheadAttention)$)");
  std::string cls(last_segment(path));
  if (std::regex_match(cls, kModule)) return "nn." + cls;
  return std::nullopt;
}

std::optional<std::string> match_tensor_method(std::string_view method) {
  if (contains(kTensorMethods, method)) return "Tensor." + std::string(method);
  return std::nullopt;
}

bool is_container_module(std::string_view path) {
  return path == "torch.nn.Sequential" || path == "torch.nn.ModuleList" || path == "torch.nn.ModuleDict";
}

}  // namespace forge::lint
