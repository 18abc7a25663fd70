#include "rkdecouple/biot/mesh.hpp"

#include <map>
#include <string>

#include "rkdecouple/errors.hpp"

namespace rkdecouple::biot {

Mesh build_mesh(int n) {
  if (n < 2) throw DomainError("build_mesh: need at least 2 cells per side, got " + std::to_string(n));
  Mesh mesh;
  mesh.n = n;
  const double h = 1.0 / n;
  for (int j = 0; j <= n; ++j)
    for (int i = 0; i <= n; ++i) mesh.vertices.emplace_back(i * h, j * h);

  auto vid = [n](int i, int j) { return j * (n + 1) + i; };
  for (int j = 0; j < n; ++j)
    for (int i = 0; i < n; ++i) {
      const int v00 = vid(i, j), v10 = vid(i + 1, j), v01 = vid(i, j + 1), v11 = vid(i + 1, j + 1);
      mesh.cells.push_back({v00, v10, v11});
      mesh.cells.push_back({v00, v11, v01});
    }

  std::map<std::pair<int, int>, int> edge_index;
  for (const auto& cell : mesh.cells) {
    std::array<int, 3> ce{};
    for (int e = 0; e < 3; ++e) {
      int a = cell[e], b = cell[(e + 1) % 3];
      if (a > b) std::swap(a, b);
      auto [it, inserted] = edge_index.try_emplace({a, b}, static_cast<int>(mesh.edges.size()));
      if (inserted) mesh.edges.push_back({a, b});
      ce[e] = it->second;
    }
    mesh.cell_edges.push_back(ce);
  }
  return mesh;
}

}  // namespace rkdecouple::biot
