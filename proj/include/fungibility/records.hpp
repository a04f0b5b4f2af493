#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fungibility/tx_graph.hpp"

namespace fungibility {

/// Source literal for transfers that create currency.
inline constexpr std::string_view kMint = "MINT";

/// Node id of the aggregated shielded pool.
inline constexpr std::string_view kShieldedPool = "shielded_pool";

/// One account-model transfer.
struct TransferRecord {
  std::int64_t seq = 0;
  std::string src;  // account id or kMint
  std::string dst;
  Amount amount = 0;
  bool shielded_src = false;
  bool shielded_dst = false;

  bool is_mint() const { return src == kMint; }

  friend bool operator==(const TransferRecord&, const TransferRecord&) = default;
};

struct OutPoint {
  std::string txid;
  std::uint32_t vout = 0;

  friend auto operator<=>(const OutPoint&, const OutPoint&) = default;
};

/// A spent coin. Shielded spends draw from the pool and carry no outpoint.
/// `value` is mandatory for inputs whose outpoint lies outside the ingested
/// window and optional (but checked) otherwise.
struct UtxoInput {
  std::optional<OutPoint> prev;
  std::optional<Amount> value;
  std::optional<std::string> owner;
  bool shielded = false;

  friend bool operator==(const UtxoInput&, const UtxoInput&) = default;
};

struct UtxoOutput {
  Amount value = 0;
  std::optional<std::string> owner;
  bool shielded = false;

  friend bool operator==(const UtxoOutput&, const UtxoOutput&) = default;
};

struct UtxoTransaction {
  std::string txid;
  std::vector<UtxoInput> inputs;
  std::vector<UtxoOutput> outputs;
  bool coinbase = false;

  friend bool operator==(const UtxoTransaction&, const UtxoTransaction&) = default;
};

/// Node id of a transparent coin: its owner key when present, else "txid:vout".
std::string coin_node_id(const OutPoint& outpoint, const std::optional<std::string>& owner);

}  // namespace fungibility
