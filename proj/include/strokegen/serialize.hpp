#pragma once

#include <string>

#include "json.hpp"
#include "strokegen/codec.hpp"
#include "strokegen/param_store.hpp"

namespace strokegen {

// JSON (de)serialization helpers shared by checkpoints, embedding tables and
// reports. Doubles survive a round trip bit-exactly (shortest-representation
// printing); non-finite values are refused.

nlohmann::json tensor_to_json(const Tensor& t);
Tensor tensor_from_json(const nlohmann::json& j);

nlohmann::json params_to_json(const ParamStore& store);
void params_from_json(const nlohmann::json& j, ParamStore& store);

nlohmann::json quantizer_to_json(const QuantizerSpec& spec);
QuantizerSpec quantizer_from_json(const nlohmann::json& j);

void write_json_file(const nlohmann::json& j, const std::string& path, int indent = -1);
nlohmann::json read_json_file(const std::string& path);

}  // namespace strokegen
