int __test_systems_placeholder;
