#pragma once

#include <span>
#include <vector>

#include "fungibility/records.hpp"
#include "fungibility/tx_graph.hpp"

namespace fungibility {

struct UtxoBuildOptions {
  /// Route shielded inputs and outputs through the single pool node.
  bool collapse_shielded = false;
};

/// One tx_node per transaction, one node per coin.
///
/// Input coins point at the transaction with their value, the transaction
/// points at each output with its value; fees are left as a surplus on the
/// tx_node. Inputs spending outpoints created outside the list become source
/// nodes whose declared balance is the input value.
TxGraph build_utxo_graph(std::span<const UtxoTransaction> txs, const UtxoBuildOptions& options = {});

/// Stationary account graph: one node per account, transfers between the
/// same ordered pair summed into one edge, MINT records as declared balances.
TxGraph build_account_graph(std::span<const TransferRecord> records);

/// Time-respecting account graph.
///
/// Each receipt gives the account a fresh snapshot node ("account@i"), fed by
/// the sender's latest snapshot and by a carry edge holding the previous
/// snapshot's remaining balance. Spends leave from the latest snapshot. A
/// spend larger than the latest snapshot's balance is rejected.
TxGraph build_temporal_account_graph(std::span<const TransferRecord> records);

/// Rewrites shielded endpoints to the pool id and drops pool-to-pool records.
std::vector<TransferRecord> collapse_shielded_records(std::span<const TransferRecord> records);

/// Account graph over the collapsed records.
TxGraph collapse_shielded(std::span<const TransferRecord> records);

/// UTXO graph with shielded coins routed through the pool.
TxGraph collapse_shielded(std::span<const UtxoTransaction> txs);

}  // namespace fungibility
