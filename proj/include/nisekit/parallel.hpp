#pragma once

#include <cstddef>
#include <exception>
#include <functional>
#include <thread>
#include <vector>

namespace nisekit {

/// Deterministic ensemble reduction: items are grouped into fixed-size blocks
/// (kBlockSize, independent of worker count), each block is reduced internally
/// in index order, and block partials are folded into the total in ascending
/// block order. The result is bit-identical for any number of workers; workers
/// only decide which thread computes a block.
inline constexpr std::size_t kEnsembleBlockSize = 64;

template <class BlockFn, class FoldFn>
void for_each_block_ordered(std::size_t n_items, unsigned workers, BlockFn&& per_block,
                            FoldFn&& fold_in_order) {
    if (n_items == 0) return;
    if (workers == 0) workers = 1;
    const std::size_t n_blocks = (n_items + kEnsembleBlockSize - 1) / kEnsembleBlockSize;
    using Result = decltype(per_block(std::size_t{0}, std::size_t{0}));

    for (std::size_t base = 0; base < n_blocks; base += workers) {
        const std::size_t round = std::min<std::size_t>(workers, n_blocks - base);
        std::vector<Result> partials(round);
        std::vector<std::exception_ptr> errors(round);
        if (round == 1) {
            const std::size_t first = base * kEnsembleBlockSize;
            const std::size_t last = std::min(n_items, first + kEnsembleBlockSize);
            partials[0] = per_block(first, last);
        } else {
            std::vector<std::thread> threads;
            threads.reserve(round);
            for (std::size_t w = 0; w < round; ++w) {
                threads.emplace_back([&, w] {
                    try {
                        const std::size_t first = (base + w) * kEnsembleBlockSize;
                        const std::size_t last = std::min(n_items, first + kEnsembleBlockSize);
                        partials[w] = per_block(first, last);
                    } catch (...) {
                        errors[w] = std::current_exception();
                    }
                });
            }
            for (auto& t : threads) t.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
        }
        for (std::size_t w = 0; w < round; ++w) fold_in_order(std::move(partials[w]));
    }
}

}  // namespace nisekit
