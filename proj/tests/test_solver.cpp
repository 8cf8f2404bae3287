#include <catch_amalgamated.hpp>

#include <exsyn/benchgen.hpp>
#include <exsyn/encoder.hpp>
#include <exsyn/solver.hpp>
#include <exsyn/synthesis.hpp>

#include <random>

using namespace exsyn;

namespace
{

cnf random_3cnf( std::mt19937_64& rng, uint32_t nv, uint32_t nc )
{
  cnf f;
  f.num_vars = nv;
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
  return f;
}

bool enumerate_sat( cnf const& f )
{
  for ( uint64_t b = 0; b < ( uint64_t( 1 ) << f.num_vars ); ++b )
  {
    bool all = true;
    for ( auto const& c : f.clauses )
    {
      bool any = false;
      for ( auto l : c )
        any = any || ( ( ( b >> ( var_of( l ) - 1 ) ) & 1u ) == ( l > 0 ) );
      if ( !any )
      {
        all = false;
        break;
      }
    }
    if ( all )
      return true;
  }
  return false;
}

std::string shell_quote( std::string const& s ) { return "'" + s + "'"; }

} // namespace

TEST_CASE( "tiny SAT cases" )
{
  cnf f;
  f.add_clause( {1, 2} );
  f.add_clause( {-1} );
  f.add_clause( {-2} );
  CHECK( solve_sat( f ).status == sat_status::unsat );

  auto e = solve_sat( cnf{} );
  CHECK( e.status == sat_status::sat );
  CHECK( e.model.size() == 1 );

  cnf g;
  g.clauses.push_back( {} );
  CHECK( solve_sat( g ).status == sat_status::unsat );
}

TEST_CASE( "property: embedded SAT agrees with enumeration on 10000 random 3-CNFs" )
{
  std::mt19937_64 rng( 1234 );
  int sat = 0;
  for ( int trial = 0; trial < 10000; ++trial )
  {
    uint32_t const nv = 3 + rng() % 10;
    /* clause/variable ratio around the phase transition */
    uint32_t const nc = static_cast<uint32_t>( nv * ( 3.0 + ( rng() % 300 ) / 100.0 ) );
    auto f = random_3cnf( rng, nv, nc );
    auto r = solve_sat( f, {}, trial % 5 );
    bool const expected = enumerate_sat( f );
    REQUIRE( ( r.status == sat_status::sat ) == expected );
    if ( expected )
      REQUIRE( f.satisfied_by( r.model ) );
    sat += expected;
  }
  CHECK( sat > 2000 );
  CHECK( sat < 8000 );
}

TEST_CASE( "harder instances: pigeonhole is unsat, incremental clauses work" )
{
  /* 6 pigeons, 5 holes */
  cnf f;
  auto p = []( int i, int h ) { return static_cast<lit>( i * 5 + h + 1 ); };
  for ( int i = 0; i < 6; ++i )
    f.add_clause( {p( i, 0 ), p( i, 1 ), p( i, 2 ), p( i, 3 ), p( i, 4 )} );
  for ( int h = 0; h < 5; ++h )
    for ( int i = 0; i < 6; ++i )
      for ( int j = i + 1; j < 6; ++j )
        f.add_clause( {-p( i, h ), -p( j, h )} );
  auto r = solve_sat( f );
  CHECK( r.status == sat_status::unsat );
  CHECK( r.stats.conflicts > 0 );

  sat_solver s;
  s.reserve_vars( 3 );
  s.add_clause( {1, 2, 3} );
  int models = 0;
  while ( s.solve() == sat_status::sat )
  {
    ++models;
    std::vector<lit> block;
    for ( var v = 1; v <= 3; ++v )
      block.push_back( s.model_value( v ) ? -lit( v ) : lit( v ) );
    s.add_clause( block );
  }
  CHECK( models == 7 );
}

TEST_CASE( "conflict budget yields unknown" )
{
  std::mt19937_64 rng( 77 );
  /* hard random instance at the threshold with many variables */
  auto f = random_3cnf( rng, 250, 1065 );
  sat_budget b;
  b.conflicts = 5;
  auto r = solve_sat( f, b );
  CHECK( r.status == sat_status::unknown );
}

TEST_CASE( "deterministic runs reproduce statistics" )
{
  std::mt19937_64 rng( 8 );
  auto f = random_3cnf( rng, 60, 255 );
  auto a = solve_sat( f );
  auto b = solve_sat( f );
  CHECK( a.status == b.status );
  CHECK( a.stats.conflicts == b.stats.conflicts );
  CHECK( a.stats.decisions == b.stats.decisions );
}

TEST_CASE( "DIMACS output format" )
{
  cnf f;
  f.add_clause( {1, -2} );
  f.add_clause( {2} );
  auto r = solve_sat( f );
  CHECK( format_sat_output( r, 2 ) == "s SATISFIABLE\nv 1 2 0\n" );
  CHECK( to_dimacs( f ) == "p cnf 2 2\n1 -2 0\n2 0\n" );
  sat_result u;
  u.status = sat_status::unsat;
  CHECK( format_sat_output( u, 2 ) == "s UNSATISFIABLE\n" );
}

#ifdef EXSYN_CLI
TEST_CASE( "external solver agrees with the embedded one" )
{
  std::string const cmd = shell_quote( EXSYN_CLI ) + " sat";
  std::mt19937_64 rng( 4321 );
  for ( int trial = 0; trial < 200; ++trial )
  {
    uint32_t const nv = 3 + rng() % 10;
    auto f = random_3cnf( rng, nv, static_cast<uint32_t>( nv * 4.3 ) );
    auto const a = solve_sat( f );
    auto const b = solve_sat_external( f, cmd );
    REQUIRE( a.status == b.status );
  }
}
#endif

TEST_CASE( "external solver errors and timeouts" )
{
  cnf f;
  f.add_clause( {1} );
  CHECK_THROWS_AS( solve_sat_external( f, "echo garbage; true" ), external_solver_error );
  CHECK_THROWS_AS( solve_sat_external( f, "printf 's SATISFIABLE\\nv -1 0\\n'; true" ), external_solver_error );
  CHECK_THROWS_AS( solve_sat_external( f, "" ), external_solver_error );
  auto ok = solve_sat_external( f, "printf 's SATISFIABLE\\nv 1 0\\n'; true" );
  CHECK( ok.status == sat_status::sat );

  sat_budget b;
  b.seconds = 0.3;
  auto const t0 = std::chrono::steady_clock::now();
  auto r = solve_sat_external( f, "sleep 5; true", b );
  auto const dt = std::chrono::duration<double>( std::chrono::steady_clock::now() - t0 ).count();
  CHECK( r.status == sat_status::unknown );
  CHECK( dt < 2.0 );
}

TEST_CASE( "2QBF on synthesis encodings of the full adder" )
{
  auto fa = gen_alu( {"add", 1} );
  auto const b = builtin_basis( "standard" );
  auto lab = create_miter( b, topology_of( fa ), fa );
  CHECK( solve_2qbf( lab.q ).status == sat_status::sat );

  synthesis_encoding_options opt;
  opt.mode = topology_mode::circuit;
  CHECK( solve_2qbf( build_synthesis_encoding( b, fa, 4, opt ).q ).status == sat_status::unsat );
  auto five = build_synthesis_encoding( b, fa, 5, opt );
  auto r = solve_2qbf( five.q );
  REQUIRE( r.status == sat_status::sat );
  CHECK( r.copies == 8 );
  CHECK( holds_for_all( five.q, r.witness ) );
}

TEST_CASE( "property: 2QBF witnesses hold for every universal assignment" )
{
  std::mt19937_64 rng( 99 );
  int checked = 0;
  for ( int trial = 0; trial < 1000; ++trial )
  {
    uint32_t const ns = 1 + rng() % 4, nx = rng() % 4, nz = rng() % 4;
    uint32_t const nv = ns + nx + nz;
    gate_graph g;
    std::vector<gate_graph::node_id> pool;
    for ( var v = 1; v <= nv; ++v )
      pool.push_back( g.variable( v ) );
    for ( int k = 0; k < 8; ++k )
    {
      auto a = pool[rng() % pool.size()], c = pool[rng() % pool.size()];
      switch ( rng() % 4 )
      {
      case 0:
        pool.push_back( g.make_and( a, c ) );
        break;
      case 1:
        pool.push_back( g.make_or( a, c ) );
        break;
      case 2:
        pool.push_back( g.make_xor( a, c ) );
        break;
      default:
        pool.push_back( g.make_not( a ) );
        break;
      }
    }
    g.set_root( pool.back() );
    qbf2 q;
    for ( var v = 1; v <= ns; ++v )
      q.S.push_back( v );
    for ( var v = ns + 1; v <= ns + nx; ++v )
      q.X.push_back( v );
    for ( var v = ns + nx + 1; v <= nv; ++v )
      q.Z.push_back( v );
    q.matrix = g;
    /* variables outside the support are harmless for all evaluators */
    bool const expected = eval_qbf_recursive( to_general( q ) );
    auto r = solve_2qbf( q );
    REQUIRE( ( r.status == sat_status::sat ) == expected );
    if ( r.status == sat_status::sat )
    {
      /* fix S to the witness; the residual forall-exists formula must be true */
      general_qbf rest = to_general( q );
      gate_graph const& m = q.graph();
      std::map<var, bool> fixed;
      for ( auto i = 0u; i < ns; ++i )
        fixed[q.S[i]] = r.witness[i];
      rest.matrix = constant_fold( m, fixed );
      rest.prefix.erase( rest.prefix.begin(), rest.prefix.begin() + ns );
      REQUIRE( eval_qbf_recursive( rest ) );
      ++checked;
    }
  }
  CHECK( checked > 100 );
}

TEST_CASE( "blocking enumerates the exact witness set" )
{
  /* exists s1..s4 forall x: (s1 xor s2) or x, and s3 -> s4 ... with x irrelevant to the count */
  gate_graph g;
  auto s1 = g.variable( 1 ), s2 = g.variable( 2 ), s3 = g.variable( 3 ), s4 = g.variable( 4 ), x = g.variable( 5 );
  auto lhs = g.make_or( g.make_xor( s1, s2 ), g.make_and( x, g.make_not( x ) ) );
  g.set_root( g.make_and( lhs, g.make_or( g.make_not( s3 ), s4 ) ) );
  qbf2 q;
  q.S = {1, 2, 3, 4};
  q.X = {5};
  q.matrix = g;

  std::set<std::vector<bool>> expected;
  for ( uint32_t b = 0; b < 16; ++b )
  {
    std::vector<bool> w{bool( b & 1 ), bool( b & 2 ), bool( b & 4 ), bool( b & 8 )};
    if ( ( w[0] != w[1] ) && ( !w[2] || w[3] ) )
      expected.insert( w );
  }
  REQUIRE( expected.size() == 6 );

  twoqbf_session s( q );
  std::set<std::vector<bool>> found;
  while ( true )
  {
    auto r = s.solve();
    if ( r.status != sat_status::sat )
      break;
    REQUIRE( found.insert( r.witness ).second );
    s.block( r.witness );
  }
  CHECK( found == expected );

  /* the functional block gives the same residual set */
  auto w0 = *expected.begin();
  auto blocked = block( q, w0 );
  twoqbf_session s_rest( blocked );
  std::set<std::vector<bool>> rest;
  while ( true )
  {
    auto r = s_rest.solve();
    if ( r.status != sat_status::sat )
      break;
    rest.insert( r.witness );
    s_rest.block( r.witness );
  }
  auto minus = expected;
  minus.erase( w0 );
  CHECK( rest == minus );
}

TEST_CASE( "two-solution toy is unsat on the third solve" )
{
  gate_graph g;
  g.set_root( g.make_xor( g.variable( 1 ), g.variable( 2 ) ) );
  qbf2 q;
  q.S = {1, 2};
  q.matrix = g;
  twoqbf_session s( q );
  auto a = s.solve();
  REQUIRE( a.status == sat_status::sat );
  s.block( a.witness );
  auto b = s.solve();
  REQUIRE( b.status == sat_status::sat );
  CHECK( a.witness != b.witness );
  s.block( b.witness );
  CHECK( s.solve().status == sat_status::unsat );
  CHECK_THROWS( s.block( {true} ) );
}
