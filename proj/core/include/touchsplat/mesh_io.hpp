#pragma once

#include "touchsplat/mesh.hpp"
#include "touchsplat/types.hpp"

#include <string>
#include <vector>

namespace touchsplat {

/// Loads a triangle mesh from OBJ or PLY (ASCII or binary little
/// endian), picked by file extension. Polygon faces are fan
/// triangulated. Throws Error on parse or I/O failure.
TriangleMesh load_mesh(const std::string& path);

TriangleMesh load_obj(const std::string& path);
TriangleMesh load_ply_mesh(const std::string& path);

/// Binary little-endian PLY point cloud: float32 x,y,z and, when
/// `normals` is non-empty, float32 nx,ny,nz. Throws Error on I/O
/// failure or a normals/points size mismatch.
void write_ply_points(const std::string& path, const std::vector<Vec3>& points,
                      const std::vector<Vec3>& normals = {});

/// Binary little-endian PLY of gaussian centers with a uchar `origin`
/// property (0 = visual, 1 = touch). Byte-stable for identical models.
void write_ply_model(const std::string& path,
                     const std::vector<GaussianPrimitive>& gaussians);

}  // namespace touchsplat
