/*
 * Copyright 2026 The sdcfhe Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <string>
#include <vector>

#include "sdcfhe/ckks/encoder.hpp"
#include "sdcfhe/ckks/evaluator.hpp"
#include "sdcfhe/ckks/stage.hpp"

namespace sdcfhe::fault {

// A ciphertext computation with fixed keys and messages. Encryption
// randomness is supplied per call so fault-free noise can be sampled.
class Workload {
 public:
  virtual ~Workload() = default;

  virtual const std::string& id() const = 0;
  virtual const ContextPtr& context() const = 0;

  virtual std::vector<Ciphertext> encrypt_inputs(std::uint64_t seed) const = 0;
  virtual Ciphertext execute(ExecContext& ex, const std::vector<Ciphertext>& inputs) const = 0;
  virtual std::vector<Complex> decrypt(const Ciphertext& ct) const = 0;

  // Expected output slots computed on the plaintext messages.
  virtual std::vector<Complex> reference() const = 0;

  // Site filter applied when a campaign does not name one.
  virtual std::string default_stage_filter() const { return {}; }

  const CkksParams& params() const { return context()->params(); }
};

}  // namespace sdcfhe::fault
