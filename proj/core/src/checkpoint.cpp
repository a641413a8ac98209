#include "rascore/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <sstream>

namespace rascore {

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw std::runtime_error("checkpoint " + path + ": " + what);
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(path, "unwritable");
  out << "rascore-ckpt " << Checkpoint::kVersion << "\n";
  out << "tag " << ckpt.tag << "\n";
  out << "seed " << ckpt.seed << "\n";
  for (const auto& [k, v] : ckpt.meta) out << "meta " << k << " " << v << "\n";

  out << "nodes " << ckpt.graph.nodes.size() << "\n";
  for (std::size_t i = 0; i < ckpt.graph.nodes.size(); ++i) {
    const auto& d = ckpt.graph.nodes[i];
    out << "node " << i << " " << layer_kind_name(d.kind) << " inputs";
    for (int in : d.inputs) out << " " << in;
    out << " ; " << d.in_ch << " " << d.out_ch << " " << d.ksize << " "
        << (d.pad == PadMode::Same ? "same" : "valid") << " " << d.in_features << " "
        << d.out_features << "\n";
  }
  out << "output " << ckpt.graph.output << "\n";

  out << "params " << ckpt.params.entries.size() << "\n";
  out << std::hex;
  for (const auto& e : ckpt.params.entries) {
    out << std::dec << "param " << e.name << " " << (e.frozen ? 1 : 0) << " " << e.value.shape.size();
    for (int d : e.value.shape) out << " " << d;
    out << "\n" << std::hex;
    for (std::size_t j = 0; j < e.value.size(); ++j) {
      if (j) out << ' ';
      out << std::bit_cast<std::uint64_t>(e.value.data[j]);
    }
    out << "\n";
  }
  out << std::dec << "end\n";
  if (!out) fail(path, "write failed");
}

Checkpoint load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(path, "unreadable");
  Checkpoint ckpt;
  std::string word;
  int version = 0;
  in >> word >> version;
  if (word != "rascore-ckpt") fail(path, "bad magic");
  if (version != Checkpoint::kVersion) fail(path, "unsupported version " + std::to_string(version));

  std::string key;
  while (in >> key) {
    if (key == "tag") {
      in >> ckpt.tag;
    } else if (key == "seed") {
      in >> ckpt.seed;
    } else if (key == "meta") {
      std::string k, line;
      in >> k;
      std::getline(in, line);
      if (!line.empty() && line.front() == ' ') line.erase(0, 1);
      ckpt.meta[k] = line;
    } else if (key == "nodes") {
      std::size_t n;
      in >> n;
      ckpt.graph.nodes.resize(n);
      for (std::size_t i = 0; i < n; ++i) {
        std::string tok, kind_name;
        std::size_t idx;
        in >> tok >> idx >> kind_name >> tok;  // "node" idx kind "inputs"
        LayerDef d;
        d.kind = layer_kind_from_name(kind_name);
        while (in >> tok && tok != ";") d.inputs.push_back(std::stoi(tok));
        std::string pad;
        in >> d.in_ch >> d.out_ch >> d.ksize >> pad >> d.in_features >> d.out_features;
        d.pad = pad == "same" ? PadMode::Same : PadMode::Valid;
        ckpt.graph.nodes[idx] = d;
      }
    } else if (key == "output") {
      in >> ckpt.graph.output;
    } else if (key == "params") {
      std::size_t n;
      in >> n;
      for (std::size_t i = 0; i < n; ++i) {
        std::string tok, name;
        int frozen, ndims;
        in >> tok >> name >> frozen >> ndims;
        std::vector<int> shape(ndims);
        for (auto& d : shape) in >> d;
        Tensor t(shape);
        in >> std::hex;
        for (auto& v : t.data) {
          std::uint64_t bits;
          in >> bits;
          v = std::bit_cast<double>(bits);
        }
        in >> std::dec;
        ckpt.params.add(name, std::move(t), frozen != 0);
      }
    } else if (key == "end") {
      break;
    } else {
      fail(path, "unknown record: " + key);
    }
    if (!in) fail(path, "truncated");
  }
  ckpt.graph.validate();
  return ckpt;
}

}  // namespace rascore
