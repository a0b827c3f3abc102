# permsum package
