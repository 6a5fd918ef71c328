#pragma once

#include "badmarket/economy.hpp"

namespace badmarket {

/// Exchange economy with consumers w = s/n (s = 1..n), weight 1/n, utility
/// x_good - w * x_bad^2 and endowment of one bad and two goods.
///
/// Internally the bad is commodity 0 and the good commodity 1; `source_order`
/// records the good-first reference order. The bad bound is 10 * n.
Economy build_hara_economy(int n);

/// Garbage / human capital / consumption good economy with consumers at the
/// midpoints of n equal cells of [0, 1].
///
/// Consumer w has box [0, w] x [0, inf) x [0, inf), endowment (0, 2w, 0) and
/// utility ln(x_3) - x_1, except ln(x_3) + x_1 for w in (0.5, 0.6). Two cone
/// firms with rays (1, -1, 1) and (-1, -1, 0) are fully owned by everybody.
Economy build_garbage_economy(int n);

/// One consumer with u = x_good - x_bad, endowment (1, 1) and no firms.
/// Internal order is (bad, good); the bad bound is 2.
Economy build_one_agent_economy();

}  // namespace badmarket
