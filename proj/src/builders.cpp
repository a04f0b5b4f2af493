#include "fungibility/builders.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <string>
#include <unordered_map>
#include <unordered_set>

#include "fungibility/error.hpp"

namespace fungibility {

std::string coin_node_id(const OutPoint& outpoint, const std::optional<std::string>& owner) {
  if (owner && !owner->empty()) return *owner;
  return outpoint.txid + ":" + std::to_string(outpoint.vout);
}

namespace {

struct CreatedCoin {
  std::string node;
  Amount value;
  bool spent = false;
};

Amount sum_checked(Amount a, Amount b, const std::string& txid) {
  Amount out = 0;
  if (__builtin_add_overflow(a, b, &out)) {
    throw ValidationError("transaction '" + txid + "': value overflow");
  }
  return out;
}

NodeKind account_kind(std::string_view id) {
  return id == kShieldedPool ? NodeKind::shielded_pool : NodeKind::address;
}

}  // namespace

TxGraph build_utxo_graph(std::span<const UtxoTransaction> txs, const UtxoBuildOptions& options) {
  TxGraphBuilder b;
  std::unordered_set<std::string> txids;
  std::map<OutPoint, CreatedCoin> created;
  std::set<OutPoint> boundary_spent;

  auto ensure_pool = [&] { b.add_node(kShieldedPool, NodeKind::shielded_pool); };

  for (const UtxoTransaction& tx : txs) {
    if (tx.txid.empty()) throw ValidationError("transaction with empty txid");
    if (!txids.insert(tx.txid).second) {
      throw ValidationError("duplicate txid '" + tx.txid + "'");
    }
    if (tx.coinbase && !tx.inputs.empty()) {
      throw ValidationError("coinbase transaction '" + tx.txid + "' has inputs");
    }
    for (const UtxoOutput& out : tx.outputs) {
      if (out.value == 0) throw ValidationError("transaction '" + tx.txid + "' has a zero output");
    }

    const bool all_shielded =
        !tx.coinbase && !tx.inputs.empty() && !tx.outputs.empty() &&
        std::all_of(tx.inputs.begin(), tx.inputs.end(), [](const UtxoInput& in) { return in.shielded; }) &&
        std::all_of(tx.outputs.begin(), tx.outputs.end(), [](const UtxoOutput& o) { return o.shielded; });
    if (options.collapse_shielded && all_shielded) {
      // Pool-to-pool: would be a self-loop of the pool.
      continue;
    }

    b.add_node(tx.txid, NodeKind::tx_node);
    Amount total_in = 0;
    for (std::size_t i = 0; i < tx.inputs.size(); ++i) {
      const UtxoInput& in = tx.inputs[i];
      const std::string where = "transaction '" + tx.txid + "' input " + std::to_string(i);
      if (in.shielded) {
        if (!options.collapse_shielded) {
          throw ValidationError(where + ": shielded input requires shielded-pool collapse");
        }
        if (!in.value || *in.value == 0) throw ValidationError(where + ": shielded input needs a positive value");
        ensure_pool();
        b.add_transfer(kShieldedPool, tx.txid, *in.value);
        total_in = sum_checked(total_in, *in.value, tx.txid);
        continue;
      }
      if (!in.prev) throw ValidationError(where + ": missing outpoint");
      auto it = created.find(*in.prev);
      if (it != created.end()) {
        CreatedCoin& coin = it->second;
        if (coin.spent) {
          throw ValidationError(where + ": double spend of " + in.prev->txid + ":" +
                                std::to_string(in.prev->vout));
        }
        if (in.value && *in.value != coin.value) {
          throw ValidationError(where + ": declared value differs from the spent output");
        }
        coin.spent = true;
        b.add_transfer(coin.node, tx.txid, coin.value);
        total_in = sum_checked(total_in, coin.value, tx.txid);
        continue;
      }
      // Created before the window: becomes a source holding the input value.
      if (!boundary_spent.insert(*in.prev).second) {
        throw ValidationError(where + ": double spend of " + in.prev->txid + ":" +
                              std::to_string(in.prev->vout));
      }
      if (!in.value || *in.value == 0) {
        throw ValidationError(where + ": outpoint " + in.prev->txid + ":" +
                              std::to_string(in.prev->vout) +
                              " lies outside the window and needs a positive value");
      }
      const std::string node = coin_node_id(*in.prev, in.owner);
      b.add_node(node, NodeKind::address, node);
      b.add_balance(node, *in.value);
      b.add_transfer(node, tx.txid, *in.value);
      total_in = sum_checked(total_in, *in.value, tx.txid);
    }

    Amount total_out = 0;
    for (std::size_t v = 0; v < tx.outputs.size(); ++v) {
      const UtxoOutput& out = tx.outputs[v];
      total_out = sum_checked(total_out, out.value, tx.txid);
      const OutPoint op{tx.txid, static_cast<std::uint32_t>(v)};
      if (out.shielded) {
        if (!options.collapse_shielded) {
          throw ValidationError("transaction '" + tx.txid + "' output " + std::to_string(v) +
                                ": shielded output requires shielded-pool collapse");
        }
        ensure_pool();
        b.add_transfer(tx.txid, kShieldedPool, out.value);
        continue;
      }
      const std::string node = coin_node_id(op, out.owner);
      b.add_node(node, NodeKind::address, node);
      b.add_transfer(tx.txid, node, out.value);
      created.emplace(op, CreatedCoin{node, out.value});
    }

    if (!tx.coinbase && total_in < total_out) {
      throw ValidationError("transaction '" + tx.txid + "' spends " + std::to_string(total_out) +
                            " but only has " + std::to_string(total_in) + " in inputs");
    }
  }
  return b.build();
}

TxGraph build_account_graph(std::span<const TransferRecord> records) {
  TxGraphBuilder b;
  for (const TransferRecord& rec : records) {
    if (rec.dst.empty() || rec.src.empty()) {
      throw ValidationError("transfer at seq " + std::to_string(rec.seq) + " has an empty endpoint");
    }
    if (rec.dst == kMint) {
      throw ValidationError("transfer at seq " + std::to_string(rec.seq) + " sends to MINT");
    }
    b.add_node(rec.dst, account_kind(rec.dst));
    if (rec.is_mint()) {
      b.add_balance(rec.dst, rec.amount);
      continue;
    }
    b.add_node(rec.src, account_kind(rec.src));
    b.add_transfer(rec.src, rec.dst, rec.amount);
  }
  return b.build();
}

TxGraph build_temporal_account_graph(std::span<const TransferRecord> records) {
  std::vector<const TransferRecord*> ordered;
  ordered.reserve(records.size());
  for (const TransferRecord& rec : records) ordered.push_back(&rec);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const TransferRecord* a, const TransferRecord* b) { return a->seq < b->seq; });

  struct Account {
    std::size_t snapshots = 0;
    Amount balance = 0;  // held by the latest snapshot
  };
  std::unordered_map<std::string, Account> accounts;
  TxGraphBuilder b;

  auto snapshot_id = [](const std::string& account, std::size_t i) {
    return account + "@" + std::to_string(i);
  };

  // Opens a new snapshot for `account`, carrying over what the previous one holds.
  auto receive = [&](const std::string& account) -> std::string {
    Account& acc = accounts[account];
    const std::string next = snapshot_id(account, acc.snapshots + 1);
    b.add_node(next, NodeKind::snapshot, account);
    if (acc.snapshots > 0 && acc.balance > 0) {
      b.add_transfer(snapshot_id(account, acc.snapshots), next, acc.balance);
    }
    ++acc.snapshots;
    return next;
  };

  for (const TransferRecord* rec : ordered) {
    if (rec->dst.empty() || rec->src.empty()) {
      throw ValidationError("transfer at seq " + std::to_string(rec->seq) + " has an empty endpoint");
    }
    if (rec->dst == kMint) {
      throw ValidationError("transfer at seq " + std::to_string(rec->seq) + " sends to MINT");
    }
    if (rec->amount == 0 || rec->src == rec->dst) continue;

    if (rec->is_mint()) {
      const std::string snap = receive(rec->dst);
      b.add_balance(snap, rec->amount);
      Account& acc = accounts[rec->dst];
      acc.balance += rec->amount;
      continue;
    }

    auto sender = accounts.find(rec->src);
    if (sender == accounts.end() || sender->second.balance < rec->amount) {
      const Amount held = sender == accounts.end() ? 0 : sender->second.balance;
      throw ValidationError("account '" + rec->src + "' overdrawn at seq " + std::to_string(rec->seq) +
                            ": spends " + std::to_string(rec->amount) + " while holding " +
                            std::to_string(held));
    }
    sender->second.balance -= rec->amount;
    const std::string from = snapshot_id(rec->src, sender->second.snapshots);

    const std::string to = receive(rec->dst);
    Account& receiver = accounts[rec->dst];
    Amount updated = 0;
    if (__builtin_add_overflow(receiver.balance, rec->amount, &updated)) {
      throw ValidationError("balance overflow for account '" + rec->dst + "'");
    }
    receiver.balance = updated;
    b.add_transfer(from, to, rec->amount);
  }
  return b.build();
}

std::vector<TransferRecord> collapse_shielded_records(std::span<const TransferRecord> records) {
  std::vector<TransferRecord> out;
  out.reserve(records.size());
  for (const TransferRecord& rec : records) {
    const bool src_pool = rec.shielded_src && !rec.is_mint();
    if (src_pool && rec.shielded_dst) continue;
    TransferRecord copy = rec;
    if (src_pool) copy.src = std::string(kShieldedPool);
    if (rec.shielded_dst) copy.dst = std::string(kShieldedPool);
    copy.shielded_src = false;
    copy.shielded_dst = false;
    out.push_back(std::move(copy));
  }
  return out;
}

TxGraph collapse_shielded(std::span<const TransferRecord> records) {
  const auto collapsed = collapse_shielded_records(records);
  return build_account_graph(collapsed);
}

TxGraph collapse_shielded(std::span<const UtxoTransaction> txs) {
  return build_utxo_graph(txs, UtxoBuildOptions{.collapse_shielded = true});
}

}  // namespace fungibility
