#include "persona/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

#include <json.hpp>

#include "persona/errors.hpp"

namespace persona {

namespace {

constexpr char kMagic[8] = {'P', 'G', 'C', 'K', 'P', 'T', '1', '\n'};

static_assert(std::endian::native == std::endian::little,
              "checkpoint I/O assumes a little-endian host");

}  // namespace

void write_checkpoint(std::ostream& out, const ModelParams& params, const CheckpointInfo& info) {
  nlohmann::ordered_json header;
  header["format"] = "persona-graph-checkpoint";
  header["version"] = 1;
  header["input_dim"] = params.head.dense.weight.rows();
  auto layers = nlohmann::ordered_json::array();
  for (const auto& l : params.gnn_layers) layers.push_back({l.w_self.rows(), l.w_self.cols()});
  header["gnn_layers"] = params.gnn_layers.size();
  header["gnn_layer_dims"] = std::move(layers);
  header["gnn_projection_dims"] = {params.gnn_projection.weight.rows(),
                                   params.gnn_projection.weight.cols()};
  header["head_hidden"] = params.head.dense.weight.cols();
  header["dropout_rate"] = params.head.dropout_rate;
  header["lambda"] = params.lambda;
  header["seed"] = info.seed;
  header["epoch"] = info.epoch;
  header["parameter_count"] = parameter_count(params);
  auto order = nlohmann::ordered_json::array();
  for_each_tensor(params, [&](ParamGroup, std::string_view name, std::span<const double>) {
    order.push_back(std::string(name));
  });
  header["tensor_order"] = std::move(order);

  const std::string text = header.dump();
  const std::uint64_t length = text.size();
  out.write(kMagic, sizeof(kMagic));
  out.write(reinterpret_cast<const char*>(&length), sizeof(length));
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  for_each_tensor(params, [&](ParamGroup, std::string_view, std::span<const double> t) {
    out.write(reinterpret_cast<const char*>(t.data()),
              static_cast<std::streamsize>(t.size() * sizeof(double)));
  });
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[8] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw DataError("not a checkpoint file (bad magic)");
  }
  std::uint64_t length = 0;
  in.read(reinterpret_cast<char*>(&length), sizeof(length));
  if (!in || length > (1U << 24)) throw DataError("corrupt checkpoint header length");
  std::string text(length, '\0');
  in.read(text.data(), static_cast<std::streamsize>(length));
  if (!in) throw DataError("truncated checkpoint header");

  Checkpoint ckpt;
  try {
    const auto header = nlohmann::json::parse(text);
    const auto input_dim = header.at("input_dim").get<Eigen::Index>();
    for (const auto& dims : header.at("gnn_layer_dims")) {
      SageLayer l;
      const auto rows = dims.at(0).get<Eigen::Index>();
      const auto cols = dims.at(1).get<Eigen::Index>();
      l.w_self.resize(rows, cols);
      l.w_neigh.resize(rows, cols);
      l.bias.resize(cols);
      ckpt.params.gnn_layers.push_back(std::move(l));
    }
    const auto& proj = header.at("gnn_projection_dims");
    ckpt.params.gnn_projection.weight.resize(proj.at(0).get<Eigen::Index>(),
                                             proj.at(1).get<Eigen::Index>());
    ckpt.params.gnn_projection.bias.resize(proj.at(1).get<Eigen::Index>());
    const auto head_hidden = header.at("head_hidden").get<Eigen::Index>();
    ckpt.params.head.dense.weight.resize(input_dim, head_hidden);
    ckpt.params.head.dense.bias.resize(head_hidden);
    ckpt.params.head.projection.weight.resize(head_hidden, static_cast<Eigen::Index>(kLabelCount));
    ckpt.params.head.projection.bias.resize(static_cast<Eigen::Index>(kLabelCount));
    ckpt.params.head.dropout_rate = header.at("dropout_rate").get<double>();
    ckpt.params.lambda = header.at("lambda").get<double>();
    ckpt.info.seed = header.at("seed").get<std::uint64_t>();
    ckpt.info.epoch = header.at("epoch").get<std::size_t>();
    if (header.at("parameter_count").get<std::size_t>() != parameter_count(ckpt.params)) {
      throw DataError("checkpoint parameter count does not match its dimensions");
    }
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("corrupt checkpoint header (") + e.what() + ")");
  }

  for_each_tensor(ckpt.params, [&](ParamGroup, std::string_view name, std::span<double> t) {
    in.read(reinterpret_cast<char*>(t.data()),
            static_cast<std::streamsize>(t.size() * sizeof(double)));
    if (!in) throw DataError("truncated checkpoint data at tensor " + std::string(name));
  });
  return ckpt;
}

void save_checkpoint(const std::filesystem::path& path, const ModelParams& params,
                     const CheckpointInfo& info) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  write_checkpoint(out, params, info);
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open checkpoint " + path.string());
  return read_checkpoint(in);
}

}  // namespace persona
