#include <catch_amalgamated.hpp>

#include <exsyn/formula.hpp>
#include <exsyn/solver.hpp>

#include <random>

using namespace exsyn;
using node_id = gate_graph::node_id;

namespace
{

/* raw (unfolded) random DAG over variables 1..nv; constants appear with small probability */
gate_graph random_graph( std::mt19937_64& rng, uint32_t nv, uint32_t gates, bool constants = false )
{
  gate_graph g;
  std::vector<node_id> pool;
  for ( var v = 1; v <= nv; ++v )
    pool.push_back( g.variable( v ) );
  if ( constants )
  {
    pool.push_back( g.constant( true ) );
    pool.push_back( g.constant( false ) );
  }
  auto pick = [&]() { return pool[rng() % pool.size()]; };
  for ( uint32_t i = 0; i < gates; ++i )
  {
    node_id n;
    switch ( rng() % 6 )
    {
    case 0:
      n = g.add_raw( gate_kind::and_, {pick(), pick()} );
      break;
    case 1:
      n = g.add_raw( gate_kind::or_, {pick(), pick(), pick()} );
      break;
    case 2:
      n = g.add_raw( gate_kind::not_, {pick()} );
      break;
    case 3:
      n = g.add_raw( gate_kind::xor_, {pick(), pick()} );
      break;
    case 4:
      n = g.add_raw( gate_kind::xnor_, {pick(), pick()} );
      break;
    default:
      n = g.add_raw( gate_kind::mux, {pick(), pick(), pick()} );
      break;
    }
    pool.push_back( n );
  }
  g.set_root( pool.back() );
  return g;
}

/* reference semantics written independently of gate_graph::simulate */
bool eval_ref( gate_graph const& g, node_id n, std::vector<bool> const& a )
{
  auto const& nd = g.at( n );
  auto in = [&]( uint32_t i ) { return eval_ref( g, nd.fanins[i], a ); };
  switch ( nd.kind )
  {
  case gate_kind::variable:
    return a[nd.data];
  case gate_kind::constant:
    return nd.data != 0;
  case gate_kind::not_:
    return !in( 0 );
  case gate_kind::and_:
    for ( auto i = 0u; i < nd.fanins.size(); ++i )
      if ( !in( i ) )
        return false;
    return true;
  case gate_kind::or_:
    for ( auto i = 0u; i < nd.fanins.size(); ++i )
      if ( in( i ) )
        return true;
    return false;
  case gate_kind::xor_:
  case gate_kind::xnor_:
  {
    bool p = nd.kind == gate_kind::xnor_;
    for ( auto i = 0u; i < nd.fanins.size(); ++i )
      p ^= in( i );
    return p;
  }
  case gate_kind::mux:
    return in( 0 ) ? in( 1 ) : in( 2 );
  }
  return false;
}

std::vector<bool> assignment( uint64_t bits, uint32_t nv )
{
  std::vector<bool> a( nv + 1, false );
  for ( var v = 1; v <= nv; ++v )
    a[v] = ( bits >> ( v - 1 ) ) & 1u;
  return a;
}

/* exists S forall X exists Z, enumerated directly over the reference semantics */
bool brute_2qbf( gate_graph const& g, uint32_t ns, uint32_t nx, uint32_t nz )
{
  auto const nv = ns + nx + nz;
  for ( uint64_t s = 0; s < ( 1u << ns ); ++s )
  {
    bool all = true;
    for ( uint64_t x = 0; x < ( 1u << nx ) && all; ++x )
    {
      bool some = false;
      for ( uint64_t z = 0; z < ( 1u << nz ) && !some; ++z )
        some = eval_ref( g, g.root(), assignment( s | ( x << ns ) | ( z << ( ns + nx ) ), nv ) );
      all = some;
    }
    if ( all )
      return true;
  }
  return false;
}

qbf2 make_qbf( gate_graph g, uint32_t ns, uint32_t nx, uint32_t nz )
{
  qbf2 q;
  for ( var v = 1; v <= ns; ++v )
    q.S.push_back( v );
  for ( var v = ns + 1; v <= ns + nx; ++v )
    q.X.push_back( v );
  for ( var v = ns + nx + 1; v <= ns + nx + nz; ++v )
    q.Z.push_back( v );
  q.matrix = std::move( g );
  return q;
}

} // namespace

TEST_CASE( "cnf drops tautologies and merges duplicates" )
{
  cnf f;
  CHECK_FALSE( f.add_clause( {1, -1} ) );
  CHECK( f.add_clause( {2, 2, -3} ) );
  REQUIRE( f.clauses.size() == 1 );
  CHECK( f.clauses[0] == std::vector<lit>{2, -3} );
  CHECK( f.num_vars == 3 );
  CHECK_THROWS( f.add_clause( {0} ) );
}

TEST_CASE( "tseitin of a single AND" )
{
  gate_graph g;
  auto a = g.variable( 1 );
  auto b = g.variable( 2 );
  g.set_root( g.make_and( a, b ) );
  auto t = tseitin( g );
  CHECK( t.formula.clauses.size() == 4 );
  uint32_t units = 0;
  for ( auto const& c : t.formula.clauses )
    units += c.size() == 1u;
  CHECK( units == 1 );
  CHECK( t.formula.num_vars == 3 );
}

TEST_CASE( "tseitin of a true root is empty" )
{
  gate_graph g;
  g.set_root( g.constant( true ) );
  auto t = tseitin( g );
  CHECK( t.formula.clauses.empty() );
  CHECK( solve_sat( t.formula ).status == sat_status::sat );

  gate_graph h;
  h.set_root( h.constant( false ) );
  CHECK( solve_sat( tseitin( h ).formula ).status == sat_status::unsat );
}

TEST_CASE( "property: tseitin is equisatisfiable on random 8-variable graphs" )
{
  std::mt19937_64 rng( 101 );
  for ( int trial = 0; trial < 1000; ++trial )
  {
    auto g = random_graph( rng, 8, 1 + rng() % 12, trial % 4 == 0 );
    bool any = false;
    for ( uint64_t b = 0; b < 256 && !any; ++b )
      any = eval_ref( g, g.root(), assignment( b, 8 ) );
    auto t = tseitin( g );
    auto r = solve_sat( t.formula );
    REQUIRE( ( r.status == sat_status::sat ) == any );
    if ( any )
    {
      auto a = r.model;
      a.resize( 9, false );
      REQUIRE( eval_ref( g, g.root(), a ) );
    }
  }
}

TEST_CASE( "property: tseitin is equisatisfiable under every leaf assignment (10 variables)" )
{
  /* fixing the leaves by unit clauses must agree with evaluation on all 1024 rows */
  std::mt19937_64 rng( 55 );
  for ( int trial = 0; trial < 20; ++trial )
  {
    auto g = random_graph( rng, 10, 15 );
    auto t = tseitin( g );
    for ( uint64_t b = 0; b < 1024; ++b )
    {
      auto f = t.formula;
      auto a = assignment( b, 10 );
      for ( var v = 1; v <= 10; ++v )
        f.clauses.push_back( {a[v] ? lit( v ) : -lit( v )} );
      REQUIRE( ( solve_sat( f ).status == sat_status::sat ) == eval_ref( g, g.root(), a ) );
    }
  }
}

TEST_CASE( "constant folding examples" )
{
  gate_graph g;
  auto x = g.variable( 1 );
  g.set_root( g.add_raw( gate_kind::and_, {x, g.constant( true )} ) );
  auto f = constant_fold( g );
  CHECK( f.at( f.root() ).kind == gate_kind::variable );
  CHECK( f.at( f.root() ).data == 1 );

  gate_graph h;
  auto y = h.variable( 2 );
  h.set_root( h.add_raw( gate_kind::xnor_, {y, h.constant( true )} ) );
  auto fh = constant_fold( h );
  CHECK( fh.at( fh.root() ).kind == gate_kind::variable );
  CHECK( fh.at( fh.root() ).data == 2 );

  gate_graph k;
  auto z = k.variable( 3 );
  k.set_root( k.add_raw( gate_kind::and_, {z, k.variable( 4 )} ) );
  auto fk = constant_fold( k, {{4, false}} );
  CHECK( fk.is_const( fk.root() ) );
  CHECK_FALSE( fk.const_value( fk.root() ) );
}

TEST_CASE( "property: constant folding preserves the function" )
{
  std::mt19937_64 rng( 202 );
  for ( int trial = 0; trial < 1000; ++trial )
  {
    auto g = random_graph( rng, 6, 1 + rng() % 14, true );
    std::map<var, bool> fixed;
    for ( var v = 1; v <= 6; ++v )
      if ( rng() % 3 == 0 )
        fixed[v] = rng() & 1u;
    auto f = constant_fold( g, fixed );
    /* no gate in the folded cone reads a constant */
    for ( auto n : f.cone() )
    {
      if ( n == f.root() && f.is_const( n ) )
        continue;
      for ( auto in : f.at( n ).fanins )
        REQUIRE_FALSE( f.is_const( in ) );
    }
    for ( uint64_t b = 0; b < 64; ++b )
    {
      auto a = assignment( b, 6 );
      for ( auto [v, val] : fixed )
        a[v] = val;
      REQUIRE( eval_ref( f, f.root(), a ) == eval_ref( g, g.root(), a ) );
    }
  }
}

TEST_CASE( "recursive QBF evaluation" )
{
  auto one_var = []( quantifier q ) {
    general_qbf f;
    gate_graph g;
    g.set_root( g.variable( 1 ) );
    f.prefix = {{q, 1}};
    f.matrix = g;
    return f;
  };
  CHECK( eval_qbf_recursive( one_var( quantifier::exists ) ) );
  CHECK_FALSE( eval_qbf_recursive( one_var( quantifier::forall ) ) );

  general_qbf f;
  gate_graph g;
  g.set_root( g.make_xnor( g.variable( 1 ), g.variable( 2 ) ) );
  f.prefix = {{quantifier::forall, 1}, {quantifier::exists, 2}};
  f.matrix = g;
  CHECK( eval_qbf_recursive( f ) );
  f.prefix = {{quantifier::exists, 2}, {quantifier::forall, 1}};
  CHECK_FALSE( eval_qbf_recursive( f ) );

  general_qbf big;
  for ( var v = 1; v <= 25; ++v )
    big.prefix.emplace_back( quantifier::exists, v );
  big.matrix = cnf{};
  CHECK_THROWS( eval_qbf_recursive( big ) );
}

TEST_CASE( "universal expansion sizes" )
{
  std::mt19937_64 rng( 9 );
  auto g = random_graph( rng, 5, 8 );
  auto q0 = make_qbf( g, 5, 0, 0 );
  auto e0 = expand_universal( q0 );
  CHECK( e0.copies == 1 );
  CHECK( ( solve_sat( e0.formula ).status == sat_status::sat ) == brute_2qbf( g, 5, 0, 0 ) );

  auto q3 = make_qbf( g, 2, 3, 0 );
  auto e3 = expand_universal( q3 );
  CHECK( e3.copies == 8 );
  CHECK( e3.s_vars == std::vector<var>{1, 2} );

  auto q17 = make_qbf( random_graph( rng, 17, 20 ), 0, 17, 0 );
  CHECK_THROWS( expand_universal( q17 ) );
  CHECK_NOTHROW( expand_universal( make_qbf( random_graph( rng, 4, 4 ), 0, 4, 0 ), 4 ) );
}

TEST_CASE( "expansion keeps S shared across copies" )
{
  /* exists s forall x: s or x is false, exists s forall x: s is true */
  gate_graph g;
  g.set_root( g.make_or( g.variable( 1 ), g.variable( 2 ) ) );
  auto q = make_qbf( g, 1, 1, 0 );
  auto r = solve_2qbf( q );
  REQUIRE( r.status == sat_status::sat );
  CHECK( r.witness == std::vector<bool>{true} );

  gate_graph h;
  h.set_root( h.make_xor( h.variable( 1 ), h.variable( 2 ) ) );
  CHECK( solve_2qbf( make_qbf( h, 1, 1, 0 ) ).status == sat_status::unsat );
  /* with an inner existential copy per x the same matrix becomes true */
  CHECK( solve_2qbf( make_qbf( h, 0, 1, 1 ) ).status == sat_status::sat );
}

TEST_CASE( "property: expansion agrees with recursive evaluation on random 2QBF" )
{
  std::mt19937_64 rng( 303 );
  int sat_count = 0;
  for ( int trial = 0; trial < 1000; ++trial )
  {
    uint32_t const ns = 1 + rng() % 4, nx = rng() % 5, nz = rng() % 4;
    auto g = random_graph( rng, ns + nx + nz, 2 + rng() % 14 );
    auto q = make_qbf( g, ns, nx, nz );
    bool const expected = eval_qbf_recursive( to_general( q ) );
    REQUIRE( expected == brute_2qbf( g, ns, nx, nz ) );
    auto e = expand_universal( q );
    REQUIRE( e.copies == ( uint64_t( 1 ) << nx ) );
    auto const got = solve_sat( e.formula ).status == sat_status::sat;
    REQUIRE( got == expected );
    sat_count += got;
  }
  /* both outcomes are exercised */
  CHECK( sat_count > 100 );
  CHECK( sat_count < 900 );
}

TEST_CASE( "property: expansion of CNF matrices agrees with recursive evaluation" )
{
  std::mt19937_64 rng( 404 );
  for ( int trial = 0; trial < 500; ++trial )
  {
    uint32_t const ns = 1 + rng() % 4, nx = rng() % 4, nz = rng() % 4;
    uint32_t const nv = ns + nx + nz;
    cnf f;
    auto const nc = 1 + rng() % 10;
    for ( uint32_t c = 0; c < nc; ++c )
    {
      std::vector<lit> cl;
      for ( int k = 0; k < 3; ++k )
      {
        lit const v = static_cast<lit>( 1 + rng() % nv );
        cl.push_back( rng() & 1u ? v : -v );
      }
      f.add_clause( cl );
    }
    qbf2 q;
    for ( var v = 1; v <= ns; ++v )
      q.S.push_back( v );
    for ( var v = ns + 1; v <= ns + nx; ++v )
      q.X.push_back( v );
    for ( var v = ns + nx + 1; v <= nv; ++v )
      q.Z.push_back( v );
    q.matrix = f;
    bool const expected = eval_qbf_recursive( to_general( q ) );
    REQUIRE( ( solve_2qbf( q ).status == sat_status::sat ) == expected );
  }
}

TEST_CASE( "qdimacs export" )
{
  qbf2 q;
  q.S = {1};
  q.X = {2};
  cnf f;
  f.add_clause( {1, 2} );
  q.matrix = f;
  CHECK( to_qdimacs( q ) == "p cnf 2 1\ne 1 0\na 2 0\n1 2 0\n" );

  qbf2 e;
  e.S = {1, 2, 3};
  e.matrix = cnf{};
  CHECK( to_qdimacs( e ) == "p cnf 3 0\ne 1 2 3 0\n" );

  auto back = parse_qdimacs( to_qdimacs( q ) );
  REQUIRE( back.blocks.size() == 2 );
  CHECK( back.blocks[0].first == quantifier::exists );
  CHECK( back.blocks[1].first == quantifier::forall );
  CHECK( back.formula.num_vars == 2 );
  CHECK( back.formula.clauses.size() == 1 );

  CHECK_THROWS( parse_qdimacs( "1 2 0\n" ) );
  CHECK_THROWS( parse_qdimacs( "p cnf 2 1\n1 2\n" ) );
}

TEST_CASE( "qdimacs export of a gate-graph matrix round trips" )
{
  std::mt19937_64 rng( 505 );
  for ( int trial = 0; trial < 50; ++trial )
  {
    auto q = make_qbf( random_graph( rng, 6, 8 ), 2, 2, 2 );
    auto text = to_qdimacs( q );
    auto back = parse_qdimacs( text );
    auto cl = clausify( q );
    CHECK( back.formula.clauses.size() == cl.clauses().clauses.size() );
    std::set<var> quantified;
    for ( auto const& [qt, vs] : back.blocks )
      quantified.insert( vs.begin(), vs.end() );
    for ( auto const& c : back.formula.clauses )
      for ( auto l : c )
        REQUIRE( quantified.count( var_of( l ) ) );
    REQUIRE( back.blocks.size() >= 2 );
    CHECK( back.blocks[0].second == q.S );
    CHECK( back.blocks[1].second == q.X );
    /* the exported prefix is still a true/false 2QBF with the same value */
    qbf2 re;
    re.S = back.blocks[0].second;
    re.X = back.blocks[1].second;
    if ( back.blocks.size() > 2 )
      re.Z = back.blocks[2].second;
    re.matrix = back.formula;
    CHECK( ( solve_2qbf( re ).status == sat_status::sat ) == eval_qbf_recursive( to_general( q ) ) );
  }
}

TEST_CASE( "block removes exactly one witness" )
{
  /* exists s1 s2 s3: s1 or s2 (6 models over S) */
  gate_graph g;
  g.variable( 3 );
  g.set_root( g.make_or( g.variable( 1 ), g.variable( 2 ) ) );
  qbf2 q = make_qbf( g, 3, 0, 0 );
  auto models = [&]( qbf2 const& f ) {
    std::set<uint64_t> m;
    for ( uint64_t b = 0; b < 8; ++b )
    {
      std::vector<bool> w{bool( b & 1 ), bool( b & 2 ), bool( b & 4 )};
      gate_graph const& gg = f.graph();
      if ( gg.evaluate( [&]( var v ) { return bool( w[v - 1] ); } ) )
        m.insert( b );
    }
    return m;
  };
  auto const before = models( q );
  std::vector<bool> w{true, false, true};
  auto blocked = block( q, w );
  auto after = models( blocked );
  auto expected = before;
  expected.erase( 5 );
  CHECK( after == expected );
}
