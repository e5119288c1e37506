#pragma once

#include <iosfwd>
#include <string>

#include "gibert/embedding_store.hpp"
#include "gibert/tools/run_config.hpp"
#include "gibert/wordpiece.hpp"

namespace gibert::tools {

/// Process exit codes.
enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitData = 2, kExitNumeric = 3 };

/// Entry point behind the `gibert` binary; never throws.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

/// Trains every configured seed, writing <out>/seed-N/{model.manifest,
/// model.bin, history.csv, report.txt} and <out>/report.txt. Returns the
/// aggregate dev report text.
std::string run_training(const RunConfig& config, std::ostream& log);

/// Piece / segment / source / injection-row table for one sentence pair.
std::string alignment_table(const std::string& first, const std::string& second, const WordPieceVocab& vocab,
                            const EmbeddingStore* store, std::size_t max_seq_len, std::size_t columns);

/// Parameter counts for both injection mechanisms and their ratio.
std::string paramcount_table(std::uint64_t hidden, std::uint64_t embedding_dim);

}  // namespace gibert::tools
